"""Disambiguate one sentence and explain each decision."""

import wikied
from wikied.linker import format_explanation

with open(wikied.data_path("saadi.dump"), encoding="utf-8") as fh:
    snap = wikied.KnowledgeSnapshot.from_records(wikied.parse_dump(fh))

text = "Saadi was born in the city of Shiraz."
mentions = [wikied.Mention("s1", text.index(s), text.index(s) + len(s), s)
            for s in ("Saadi", "city", "Shiraz")]

annotations = wikied.link_document(text, mentions, snap, wikied.ScorerConfig(), wikied.LinkerConfig())
for ann in annotations:
    print(f"{ann.mention.surface!r:9} -> {ann.decision_title}  (confidence {ann.confidence:.3f})")

# Every candidate keeps its per-module weights, so the choice can be audited.
print()
print(format_explanation(wikied.explain(annotations[0])))

# Turning off modules changes the evidence but not the API.
textual_only = wikied.ScorerConfig(enabled_modules=frozenset({"textual"}))
ann = wikied.link_document(text, mentions, snap, textual_only, wikied.LinkerConfig())[0]
print(f"\ntextual only: {ann.decision_title} ({ann.confidence:.3f}), alternatives:",
      [(c.title, round(c.final, 3)) for c in ann.ambiguity_list])
