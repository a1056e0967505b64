"""Score the linker against gold annotations in the native and NIF formats."""

from pathlib import Path

import wikied
from wikied.evaluation import report_from_predictions

with open(wikied.data_path("saadi.dump"), encoding="utf-8") as fh:
    snap = wikied.KnowledgeSnapshot.from_records(wikied.parse_dump(fh))

corpus = wikied.load_corpus(wikied.data_path("saadi_sentence.jsonl"), "native", snap)
report = wikied.evaluate(corpus, snap, wikied.ScorerConfig(), wikied.LinkerConfig())
print(report.format_text())

# The same sentence as NIF triples. Its gold for Shiraz names the redirect
# Old_Shiraz, which is canonicalized before scoring.
nif = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "saadi.nt"
if nif.exists():
    corpus = wikied.load_corpus(nif, "nif", snap)
    print(wikied.evaluate(corpus, snap, wikied.ScorerConfig(), wikied.LinkerConfig()).to_dict())

# Counting policy, by hand: a wrong entity costs a false positive and a
# false negative; NIL against NIL is ignored.
shiraz, city = snap.id_of("Shiraz"), snap.id_of("City")
pairs = [(shiraz, shiraz), (city, shiraz), (None, city), (city, None), (None, None)]
r = report_from_predictions(pairs)
print((r.tp, r.fp, r.fn), f"P={r.micro_precision:.3f} R={r.micro_recall:.3f} F1={r.micro_f1:.3f}")
