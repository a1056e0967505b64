"""Immutable in-memory view of a snapshot file."""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import ContractError, SnapshotCorruptError, SnapshotError, SnapshotVersionError
from .ingest import FORMAT_VERSION, MAGIC, LinkList, SnapshotManifest, encode_snapshot
from .text import fold


@dataclass(frozen=True)
class Entity:
    id: int
    title: str
    infobox_type: Optional[str]
    term_vector: Mapping[str, int]
    llc1: LinkList


@dataclass(frozen=True, eq=False)
class KnowledgeSnapshot:
    """Read-only knowledge base: entities, aliases and the link-count cache.

    All lookups are pure. ``llc2`` results are memoized behind a lock so
    concurrent readers see identical lists.
    """

    manifest: SnapshotManifest
    entities: Tuple[Entity, ...]
    redirects: Mapping[str, int]
    disambig: Mapping[str, Tuple[int, ...]]
    doc_freq: Mapping[str, int]
    title_index: Mapping[str, int]
    _exact: Mapping[str, int] = field(repr=False, default=MappingProxyType({}))
    _folded_redirects: Mapping[str, int] = field(repr=False, default=MappingProxyType({}))
    _folded_disambig: Mapping[str, Tuple[int, ...]] = field(repr=False, default=MappingProxyType({}))
    _llc2_cache: Dict[int, LinkList] = field(repr=False, default_factory=dict)
    _lock: threading.Lock = field(repr=False, default_factory=threading.Lock)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_payload(cls, manifest: SnapshotManifest, payload: dict) -> "KnowledgeSnapshot":
        try:
            raw_entities = payload["entities"]
            n = len(raw_entities)
            entities = []
            for eid, raw in enumerate(raw_entities):
                links = tuple((int(t), int(c)) for t, c in raw["links"])
                for t, c in links:
                    if not 0 <= t < n or c < 1:
                        raise SnapshotCorruptError(f"entity {eid} has invalid link ({t}, {c})")
                entities.append(Entity(
                    id=eid,
                    title=raw["title"],
                    infobox_type=raw["infobox_type"],
                    term_vector=MappingProxyType(dict(raw["terms"])),
                    llc1=links,
                ))
            redirects = {str(k): int(v) for k, v in payload["redirects"].items()}
            disambig = {str(k): tuple(int(i) for i in v) for k, v in payload["disambig"].items()}
            doc_freq = {str(k): int(v) for k, v in payload["doc_freq"].items()}
            title_index = {str(k): int(v) for k, v in payload["title_index"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SnapshotCorruptError(f"malformed snapshot payload: {exc!r}") from exc

        for eid in list(redirects.values()) + list(title_index.values()) + [
            i for ids in disambig.values() for i in ids
        ]:
            if not 0 <= eid < n:
                raise SnapshotCorruptError(f"reference to unknown entity id {eid}")
        if any(df > n or df < 1 for df in doc_freq.values()):
            raise SnapshotCorruptError("document frequency out of range")
        if (manifest.entity_count, manifest.redirect_count, manifest.disambig_count,
                manifest.vocabulary_size) != (n, len(redirects), len(disambig), len(doc_freq)):
            raise SnapshotCorruptError("manifest counts disagree with snapshot sections")

        exact = {e.title: e.id for e in entities}
        if len(exact) != n:
            raise SnapshotCorruptError("duplicate entity titles")
        folded_redirects: Dict[str, int] = {}
        for title in sorted(redirects):
            folded_redirects.setdefault(fold(title), redirects[title])
        folded_disambig: Dict[str, List[int]] = {}
        for title in sorted(disambig):
            bucket = folded_disambig.setdefault(fold(title), [])
            bucket.extend(i for i in disambig[title] if i not in bucket)

        return cls(
            manifest=manifest,
            entities=tuple(entities),
            redirects=MappingProxyType(redirects),
            disambig=MappingProxyType(disambig),
            doc_freq=MappingProxyType(doc_freq),
            title_index=MappingProxyType(title_index),
            _exact=MappingProxyType(exact),
            _folded_redirects=MappingProxyType(folded_redirects),
            _folded_disambig=MappingProxyType({k: tuple(v) for k, v in folded_disambig.items()}),
        )

    @classmethod
    def from_records(cls, records, build_timestamp: int = 0) -> "KnowledgeSnapshot":
        """Build in memory without touching disk (same bytes as build_snapshot)."""
        return loads_snapshot(encode_snapshot(list(records), build_timestamp))

    # -- lookups ----------------------------------------------------------

    @property
    def entity_count(self) -> int:
        return len(self.entities)

    def entity(self, entity_id: int) -> Entity:
        if not isinstance(entity_id, int) or not 0 <= entity_id < len(self.entities):
            raise ContractError(f"entity id {entity_id!r} out of range")
        return self.entities[entity_id]

    def title(self, entity_id: int) -> str:
        return self.entity(entity_id).title

    def id_of(self, title: str) -> int:
        """Exact canonical title to id; KeyError if absent."""
        return self._exact[title]

    def resolve_title(self, surface: str) -> Optional[int]:
        """Resolve a surface string to an article id via titles, then redirects.

        An exact title match wins; otherwise the case-folded surface is looked
        up among article titles and then redirect titles.
        """
        if surface in self._exact:
            return self._exact[surface]
        if surface in self.redirects:
            return self.redirects[surface]
        key = fold(surface)
        if key in self.title_index:
            return self.title_index[key]
        return self._folded_redirects.get(key)

    def disambiguation_targets(self, surface: str) -> Tuple[int, ...]:
        """Targets of every disambiguation page whose folded title equals the folded surface."""
        return self._folded_disambig.get(fold(surface), ())

    def llc1(self, entity_id: int) -> LinkList:
        return self.entity(entity_id).llc1

    def llc2(self, entity_id: int, damping: float = 1.0) -> LinkList:
        """Own links merged with the links of every directly linked article.

        Counts for repeated targets are summed; second-hop lists are added
        once each (not scaled by the first-hop count) and multiplied by
        ``damping``. Links back to ``entity_id`` are dropped.
        """
        if damping == 1.0:
            with self._lock:
                cached = self._llc2_cache.get(entity_id)
            if cached is not None:
                return cached
        first = self.llc1(entity_id)
        merged: Dict[int, float] = dict(first)
        for target, _ in first:
            for t2, c2 in self.entities[target].llc1:
                if t2 == entity_id:
                    continue
                merged[t2] = merged.get(t2, 0) + (c2 if damping == 1.0 else c2 * damping)
        result = tuple(merged.items())
        if damping == 1.0:
            with self._lock:
                result = self._llc2_cache.setdefault(entity_id, result)
        return result

    def idf(self, term: str) -> float:
        """Smoothed inverse document frequency, ``ln(1 + N / (1 + df))``."""
        n = len(self.entities)
        return math.log1p(n / (1 + self.doc_freq.get(term, 0)))


def loads_snapshot(data: bytes) -> KnowledgeSnapshot:
    """Decode snapshot bytes; see load_snapshot."""
    head, sep, body = data.partition(b"\n")
    if not sep:
        raise SnapshotCorruptError("snapshot header is truncated")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotCorruptError(f"unreadable snapshot header: {exc}") from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise SnapshotCorruptError("not a wikied snapshot")
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(
            f"snapshot format_version {version!r} unsupported (expected {FORMAT_VERSION})"
        )
    if len(body) != header.get("payload_bytes"):
        raise SnapshotCorruptError(
            f"payload is {len(body)} bytes, header says {header.get('payload_bytes')}"
        )
    if hashlib.sha256(body).hexdigest() != header.get("payload_sha256"):
        raise SnapshotCorruptError("payload checksum mismatch")
    try:
        manifest = SnapshotManifest(**header["manifest"])
        payload = json.loads(body.decode("utf-8"))
    except (KeyError, TypeError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotCorruptError(f"malformed snapshot: {exc}") from exc
    if manifest.format_version != FORMAT_VERSION:
        raise SnapshotVersionError("manifest format_version mismatch")
    return KnowledgeSnapshot.from_payload(manifest, payload)


def load_snapshot(path: Union[str, Path]) -> KnowledgeSnapshot:
    """Read a snapshot file fully into memory; the file is not touched again."""
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise SnapshotError(f"snapshot not found: {path}") from None
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    return loads_snapshot(data)
