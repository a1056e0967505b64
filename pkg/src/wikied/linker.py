"""Top-weight selection, NIL detection and ambiguity lists."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .candidates import DEFAULT_MAX_CANDIDATES, NIL, Document, Mention, build_context
from .errors import InputError
from .scoring import MODULES, ScorerConfig, ScoreVector, document_terms, score_mention
from .store import KnowledgeSnapshot


@dataclass(frozen=True)
class LinkerConfig:
    nil_threshold: float = 0.05
    max_candidates: int = DEFAULT_MAX_CANDIDATES

    def __post_init__(self):
        if not 0.0 <= self.nil_threshold <= 1.0:
            raise InputError("nil_threshold must lie in [0, 1]")
        if self.max_candidates < 1:
            raise InputError("max_candidates must be >= 1")


@dataclass(frozen=True)
class RankedCandidate:
    entity_id: int
    title: str
    scores: ScoreVector

    @property
    def final(self) -> float:
        return self.scores.final


@dataclass(frozen=True)
class LinkedAnnotation:
    mention: Mention
    decision: Optional[int]
    decision_title: str
    confidence: float
    chosen: Optional[RankedCandidate]
    ambiguity_list: Tuple[RankedCandidate, ...]

    @property
    def is_nil(self) -> bool:
        return self.decision is None

    def to_record(self, with_ambiguity: bool = False) -> Dict[str, Any]:
        rec: Dict[str, Any] = {
            "doc_id": self.mention.doc_id,
            "start": self.mention.start,
            "end": self.mention.end,
            "surface": self.mention.surface,
            "decision": self.decision_title,
            "confidence": self.confidence,
        }
        if with_ambiguity:
            rec["ambiguity_list"] = [
                {"title": c.title, "final": c.final, "weights": dict(c.scores.weights)}
                for c in self.ambiguity_list
            ]
        return rec


def rank(candidates: Iterable[RankedCandidate]) -> List[RankedCandidate]:
    """Descending final weight, ties by ascending title."""
    return sorted(candidates, key=lambda c: (-c.final, c.title))


def decide(mention: Mention, ranked: Sequence[RankedCandidate], config: LinkerConfig) -> LinkedAnnotation:
    if ranked and ranked[0].final >= config.nil_threshold:
        top = ranked[0]
        return LinkedAnnotation(mention, top.entity_id, top.title, top.final, top, tuple(ranked[1:]))
    return LinkedAnnotation(mention, None, NIL, 0.0, None, tuple(ranked))


def link_document(
    text: str,
    mentions: Sequence[Mention],
    snapshot: KnowledgeSnapshot,
    scorer_config: Optional[ScorerConfig] = None,
    linker_config: Optional[LinkerConfig] = None,
) -> List[LinkedAnnotation]:
    """Link every mention of one document; output follows input order."""
    scorer_config = scorer_config or ScorerConfig()
    linker_config = linker_config or LinkerConfig()
    context = build_context(text, mentions, snapshot, linker_config.max_candidates)
    doc_terms = document_terms(text) if "textual" in scorer_config.enabled_modules else None
    decided: Dict[Mention, LinkedAnnotation] = {}
    for mention in context.per_mention:
        vectors = score_mention(mention, text, context, snapshot, scorer_config, doc_terms)
        ranked = rank(RankedCandidate(eid, snapshot.title(eid), vec) for eid, vec in vectors.items())
        decided[mention] = decide(mention, ranked, linker_config)
    return [decided[m] for m in mentions]


def link_corpus(
    documents: Sequence[Document],
    snapshot: KnowledgeSnapshot,
    scorer_config: Optional[ScorerConfig] = None,
    linker_config: Optional[LinkerConfig] = None,
    workers: int = 1,
) -> List[LinkedAnnotation]:
    """Link all documents, optionally in parallel; sorted by (doc_id, start, end)."""

    def run(doc: Document) -> List[LinkedAnnotation]:
        return link_document(doc.text, doc.mentions, snapshot, scorer_config, linker_config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_doc = list(pool.map(run, documents))
    else:
        per_doc = [run(doc) for doc in documents]
    flat = [a for anns in per_doc for a in anns]
    flat.sort(key=lambda a: (a.mention.doc_id, a.mention.start, a.mention.end))
    return flat


def explain(annotation: LinkedAnnotation) -> Dict[str, Any]:
    """Per-candidate module weights and products, chosen candidate first.

    The returned dict is JSON-serializable; ``format_explanation`` renders it
    as a table.
    """
    rows = []
    ranked = ([annotation.chosen] if annotation.chosen else []) + list(annotation.ambiguity_list)
    for c in ranked:
        rows.append({
            "entity_id": c.entity_id,
            "title": c.title,
            "weights": dict(c.scores.weights),
            "final": c.final,
            "chosen": annotation.chosen is c,
        })
    m = annotation.mention
    return {
        "doc_id": m.doc_id,
        "span": [m.start, m.end],
        "surface": m.surface,
        "decision": annotation.decision_title,
        "nil": annotation.is_nil,
        "confidence": annotation.confidence,
        "candidates": rows,
    }


def format_explanation(report: Dict[str, Any]) -> str:
    head = (f"{report['doc_id']} [{report['span'][0]}:{report['span'][1]}] "
            f"{report['surface']!r} -> {report['decision']} (confidence {report['confidence']:.4f})")
    lines = [head]
    if not report["candidates"]:
        lines.append("  (no candidates)")
        return "\n".join(lines)
    cols = [m for m in MODULES if any(m in r["weights"] for r in report["candidates"])]
    lines.append("  " + "  ".join([f"{'':1}", f"{'title':<30}"] + [f"{c:>8}" for c in cols] + [f"{'final':>10}"]))
    for r in report["candidates"]:
        mark = "*" if r["chosen"] else " "
        cells = [f"{r['weights'][c]:>8.4f}" if c in r["weights"] else f"{'-':>8}" for c in cols]
        lines.append("  " + "  ".join([mark, f"{r['title']:<30}"] + cells + [f"{r['final']:>10.6f}"]))
    return "\n".join(lines)
