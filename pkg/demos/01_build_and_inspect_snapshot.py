"""Build a snapshot from the bundled Saadi dump and look inside it."""

import tempfile
from pathlib import Path

import wikied
from wikied.ingest import build_snapshot_from_dump

dump = wikied.data_path("saadi.dump")
out = Path(tempfile.mkdtemp()) / "saadi.snap"

# Building is deterministic: the same dump always yields the same bytes.
manifest = build_snapshot_from_dump(dump, out)
print("manifest:", manifest.summary())

snap = wikied.load_snapshot(out)
print("entities:", [e.title for e in snap.entities])

# Redirects and case folding both resolve to canonical entities.
for surface in ("Saadi", "old shiraz", "SHIRAZ", "Tehran"):
    eid = snap.resolve_title(surface)
    print(f"{surface!r:14} -> {snap.title(eid) if eid is not None else None}")

# The disambiguation page lists the ambiguous readings of "Saadi".
print("Saadi (disambiguation):", [snap.title(i) for i in snap.disambiguation_targets("Saadi")])

# First-level link list: counts of outgoing links, in first-occurrence order.
saadi = snap.id_of("Saadi")
print("llc1(Saadi):", [(snap.title(t), c) for t, c in snap.llc1(saadi)])
print("llc2(Saadi):", [(snap.title(t), c) for t, c in snap.llc2(saadi)])

# Rare words get a larger inverse document frequency.
for term in ("poet", "township", "unseen"):
    print(f"idf({term}) = {snap.idf(term):.3f}")
