"""Link-graph weights on two small worlds.

A candidate's weight counts its links that land on a candidate of some
other mention. Level 1 uses direct links only. Level 2 also follows one hop.
"""

import wikied
from wikied.candidates import build_context
from wikied.ingest import DumpRecord, PageKind
from wikied.scoring import ScorerConfig, linkgraph_weight


def spans(text, *surfaces):
    return [wikied.Mention("d", text.index(s), text.index(s) + len(s), s) for s in surfaces]


cfg = ScorerConfig()

# World one: the bundled dump, loaded in memory. Saadi links Shiraz 10 times,
# Persian 4 times and Poet 12 times.
with open(wikied.data_path("saadi.dump"), encoding="utf-8") as fh:
    snap = wikied.KnowledgeSnapshot.from_records(wikied.parse_dump(fh))

text = "Saadi the poet of Shiraz"
ctx = build_context(text, spans(text, "Saadi", "poet", "Shiraz"), snap)
print("candidate list:", sorted(snap.title(i) for i in ctx.cl))

# Persian is never mentioned, so only Shiraz (10) and Poet (12) count.
saadi = snap.entity(snap.id_of("Saadi"))
print("level-1 weight of Saadi:", linkgraph_weight(saadi, ctx, 1, snap, cfg))

# World two: A1 only reaches C2 through D2, and A2 has no links at all.
article = lambda t, body="": DumpRecord(t, PageKind.ARTICLE, body=body)
records = [
    article("A1", "[[D2]]"),
    article("A2"),
    article("D2", "[[C2]] [[C2]] [[C2]]"),
    article("C2"),
    DumpRecord("Saadi", PageKind.DISAMBIGUATION, disambig_targets=("A1", "A2")),
    DumpRecord("Shiraz", PageKind.REDIRECT, redirect_target="C2"),
]
two_hop = wikied.KnowledgeSnapshot.from_records(records)
text = "Saadi was born in the city of Shiraz."
ctx = build_context(text, spans(text, "Saadi", "Shiraz"), two_hop)

for level in (1, 2):
    weights = {t: linkgraph_weight(two_hop.entity(two_hop.id_of(t)), ctx, level, two_hop, cfg)
               for t in ("A1", "A2")}
    print(f"level {level}:", weights)
# Level 1 cannot separate the readings; level 2 finds A1's path to Shiraz.
