"""Mentions, documents and candidate generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .errors import InputError
from .store import KnowledgeSnapshot

NIL = "NIL"
DEFAULT_MAX_CANDIDATES = 64


@dataclass(frozen=True)
class Mention:
    """A pre-marked span. Offsets are code-point indices into the document text."""

    doc_id: str
    start: int
    end: int
    surface: str
    gold: Optional[str] = None

    def check(self, text: str) -> None:
        if not (0 <= self.start < self.end <= len(text)):
            raise InputError(
                f"mention [{self.start}, {self.end}) out of bounds for document "
                f"{self.doc_id!r} of length {len(text)}"
            )
        if text[self.start:self.end] != self.surface:
            raise InputError(
                f"mention surface {self.surface!r} does not match text "
                f"{text[self.start:self.end]!r} at [{self.start}, {self.end}) in {self.doc_id!r}"
            )


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    mentions: Tuple[Mention, ...] = ()


@dataclass(frozen=True)
class CandidateContext:
    """Per-mention candidate ids plus their document-wide union ``cl``."""

    mentions: Tuple[Mention, ...]
    per_mention: Mapping[Mention, Tuple[int, ...]]
    cl: FrozenSet[int]

    def candidates(self, mention: Mention) -> Tuple[int, ...]:
        return self.per_mention[mention]

    def mentions_with(self, entity_id: int) -> List[Mention]:
        return [m for m in self.mentions if entity_id in self.per_mention[m]]


def generate_candidates(
    mention: Mention,
    snapshot: KnowledgeSnapshot,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> Tuple[int, ...]:
    """Direct title/redirect match first, then disambiguation targets in page order."""
    ordered: List[int] = []
    direct = snapshot.resolve_title(mention.surface)
    if direct is not None:
        ordered.append(direct)
    for eid in snapshot.disambiguation_targets(mention.surface):
        if eid not in ordered:
            ordered.append(eid)
    return tuple(ordered[:max_candidates])


def build_context(
    text: str,
    mentions: Sequence[Mention],
    snapshot: KnowledgeSnapshot,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> CandidateContext:
    per_mention: Dict[Mention, Tuple[int, ...]] = {}
    for m in mentions:
        m.check(text)
        if m not in per_mention:
            per_mention[m] = generate_candidates(m, snapshot, max_candidates)
    cl = frozenset(eid for ids in per_mention.values() for eid in ids)
    return CandidateContext(mentions=tuple(mentions), per_mention=per_mention, cl=cl)
