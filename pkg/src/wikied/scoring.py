"""Candidate weighting modules and their per-mention combination.

Four modules score every (mention, candidate) pair:

``infobox``
    context-cue check for candidates whose infobox class is listed in the
    rules; a missing cue multiplies the candidate by a penalty in (0, 1).
``textual``
    TF-IDF cosine between the document and the candidate's article.
``llc1`` / ``llc2``
    sum of link counts from the candidate's article (one or two hops) to
    other candidates of the document.

Link-graph weights are raw counts and are max-normalized per mention; the
two bounded modules are used as-is. Zeros are floored at ``smoothing_eps``
and a module that gives every candidate zero abstains (all 1.0).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from .candidates import CandidateContext, Mention
from .errors import ContractError, InputError
from .store import Entity, KnowledgeSnapshot
from .text import tokenize

MODULES: Tuple[str, ...] = ("infobox", "textual", "llc1", "llc2")
LINKGRAPH_MODULES = ("llc1", "llc2")


@dataclass(frozen=True)
class ScorerConfig:
    infobox_penalty: float = 0.5
    infobox_rules: Mapping[str, FrozenSet[str]] = field(default_factory=dict)
    # Per-class penalty overrides; classes absent here use infobox_penalty.
    infobox_penalties: Mapping[str, float] = field(default_factory=dict)
    context_window: int = 50
    enabled_modules: FrozenSet[str] = frozenset(MODULES)
    smoothing_eps: float = 0.01
    intra_mention_edges: bool = False
    # None = whole document as textual context; else tokens each side of the mention.
    textual_window: Optional[int] = None
    llc2_damping: float = 1.0

    def __post_init__(self):
        if not 0 < self.infobox_penalty < 1:
            raise InputError("infobox_penalty must lie in (0, 1)")
        for cls, p in self.infobox_penalties.items():
            if not 0 < p < 1:
                raise InputError(f"penalty for class {cls!r} must lie in (0, 1)")
        if not 0 < self.smoothing_eps < 1:
            raise InputError("smoothing_eps must lie in (0, 1)")
        if self.context_window < 0:
            raise InputError("context_window must be >= 0")
        if self.textual_window is not None and self.textual_window < 0:
            raise InputError("textual_window must be >= 0")
        unknown = set(self.enabled_modules) - set(MODULES)
        if unknown:
            raise InputError(f"unknown modules: {sorted(unknown)}")
        object.__setattr__(self, "enabled_modules", frozenset(self.enabled_modules))
        object.__setattr__(
            self, "infobox_rules",
            {cls: frozenset(cues) for cls, cues in self.infobox_rules.items()},
        )

    def penalty_for(self, infobox_class: str) -> float:
        return self.infobox_penalties.get(infobox_class, self.infobox_penalty)


def load_infobox_rules(path: Union[str, Path]) -> Tuple[Dict[str, FrozenSet[str]], Dict[str, float]]:
    """Read a rules file; returns (class -> cue phrases, class -> penalty override).

    The file is a JSON object mapping an infobox class either to a list of
    cue phrases or to ``{"cues": [...], "penalty": 0.3}``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read infobox rules {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"{path}: top level must be an object")
    rules: Dict[str, FrozenSet[str]] = {}
    penalties: Dict[str, float] = {}
    for cls, spec in raw.items():
        if isinstance(spec, dict):
            cues = spec.get("cues", [])
            if "penalty" in spec:
                penalties[cls] = float(spec["penalty"])
        else:
            cues = spec
        if not isinstance(cues, list) or not all(isinstance(c, str) for c in cues):
            raise InputError(f"{path}: cues for {cls!r} must be a list of strings")
        rules[cls] = frozenset(cues)
    return rules, penalties


@dataclass(frozen=True)
class ScoreVector:
    weights: Mapping[str, float]
    final: float

    @classmethod
    def combine(cls, weights: Mapping[str, float]) -> "ScoreVector":
        ordered = {m: weights[m] for m in MODULES if m in weights}
        final = 1.0
        for w in ordered.values():
            final *= w
        return cls(weights=ordered, final=final)


# ---------------------------------------------------------------------------
# Context windows
# ---------------------------------------------------------------------------

def _window(text: str, mention: Mention, width: int) -> Tuple[list, list]:
    left = tokenize(text[:mention.start])
    right = tokenize(text[mention.end:])
    return (left[-width:] if width else []), right[:width]


def _contains(tokens: list, phrase: Tuple[str, ...]) -> bool:
    k = len(phrase)
    if k == 0 or k > len(tokens):
        return False
    return any(tuple(tokens[i:i + k]) == phrase for i in range(len(tokens) - k + 1))


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------

def infobox_score(mention: Mention, candidate: Entity, text: str, config: ScorerConfig) -> float:
    """1.0 unless the candidate's class is ruled and no cue occurs near the mention."""
    cls = candidate.infobox_type
    if cls is None or cls not in config.infobox_rules:
        return 1.0
    left, right = _window(text, mention, config.context_window)
    for cue in config.infobox_rules[cls]:
        phrase = tuple(tokenize(cue))
        if _contains(left, phrase) or _contains(right, phrase):
            return 1.0
    return config.penalty_for(cls)


def tfidf_cosine(tf_a: Mapping[str, float], tf_b: Mapping[str, float],
                 idf: Callable[[str], float]) -> float:
    """Cosine of two raw term-frequency maps weighted by ``idf``; 0 if either is zero."""
    weights: Dict[str, float] = {}

    def w(term: str) -> float:
        if term not in weights:
            weights[term] = idf(term)
        return weights[term]

    norm_a = math.sqrt(sum((f * w(t)) ** 2 for t, f in tf_a.items()))
    norm_b = math.sqrt(sum((f * w(t)) ** 2 for t, f in tf_b.items()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    small, large = (tf_a, tf_b) if len(tf_a) <= len(tf_b) else (tf_b, tf_a)
    dot = sum(f * large[t] * w(t) ** 2 for t, f in small.items() if t in large)
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def document_terms(text: str, mention: Optional[Mention] = None,
                   window: Optional[int] = None) -> Counter:
    if window is None or mention is None:
        return Counter(tokenize(text))
    left, right = _window(text, mention, window)
    return Counter(left + tokenize(mention.surface) + right)


def textual_score(mention: Mention, candidate: Entity, text: str,
                  snapshot: KnowledgeSnapshot, config: ScorerConfig,
                  doc_terms: Optional[Mapping[str, int]] = None) -> float:
    """TF-IDF cosine between the mention's document and the candidate article."""
    if doc_terms is None:
        doc_terms = document_terms(text, mention, config.textual_window)
    return tfidf_cosine(doc_terms, candidate.term_vector, snapshot.idf)


def linkgraph_weight(candidate: Entity, context: CandidateContext, level: int,
                     snapshot: KnowledgeSnapshot, config: ScorerConfig,
                     mention: Optional[Mention] = None) -> float:
    """Sum of link counts from the candidate's LLC list to targets in CL.

    Unless ``config.intra_mention_edges`` is set, targets that compete with
    the candidate for the same mention do not count. ``mention`` names that
    mention; if omitted, every mention listing the candidate is used.
    """
    if candidate.id not in context.cl:
        raise ContractError(f"candidate {candidate.title!r} is not in the candidate list")
    if level == 1:
        links: Iterable = snapshot.llc1(candidate.id)
    elif level == 2:
        links = snapshot.llc2(candidate.id, config.llc2_damping)
    else:
        raise ContractError(f"level must be 1 or 2, got {level!r}")

    siblings: set = set()
    if not config.intra_mention_edges:
        owners = [mention] if mention is not None else context.mentions_with(candidate.id)
        for m in owners:
            siblings.update(context.per_mention[m])
    total = 0
    for target, count in links:
        if target in context.cl and target not in siblings:
            total += count
    return total


def normalize_mention_scores(raw: Mapping[int, float], config: ScorerConfig) -> Dict[int, float]:
    """Divide by the per-mention maximum and floor at eps; all-zero means abstain."""
    if not raw:
        raise ContractError("cannot normalize an empty score map")
    top = max(raw.values())
    if top <= 0:
        return {k: 1.0 for k in raw}
    return {k: max(v / top, config.smoothing_eps) for k, v in raw.items()}


def floor_mention_scores(raw: Mapping[int, float], config: ScorerConfig) -> Dict[int, float]:
    """For modules already in [0, 1]: floor zeros at eps, or abstain when all are zero."""
    if not raw:
        raise ContractError("cannot normalize an empty score map")
    if max(raw.values()) <= 0:
        return {k: 1.0 for k in raw}
    return {k: max(min(v, 1.0), config.smoothing_eps) for k, v in raw.items()}


def score_mention(mention: Mention, text: str, context: CandidateContext,
                  snapshot: KnowledgeSnapshot, config: ScorerConfig,
                  doc_terms: Optional[Mapping[str, int]] = None) -> Dict[int, ScoreVector]:
    candidates = context.per_mention[mention]
    if not candidates:
        return {}
    entities = [snapshot.entity(eid) for eid in candidates]
    normalized: Dict[str, Dict[int, float]] = {}
    if "infobox" in config.enabled_modules:
        raw = {e.id: infobox_score(mention, e, text, config) for e in entities}
        normalized["infobox"] = floor_mention_scores(raw, config)
    if "textual" in config.enabled_modules:
        terms = doc_terms if config.textual_window is None else None
        raw = {e.id: textual_score(mention, e, text, snapshot, config, terms) for e in entities}
        normalized["textual"] = floor_mention_scores(raw, config)
    for level, name in ((1, "llc1"), (2, "llc2")):
        if name in config.enabled_modules:
            raw = {e.id: linkgraph_weight(e, context, level, snapshot, config, mention)
                   for e in entities}
            normalized[name] = normalize_mention_scores(raw, config)
    return {
        eid: ScoreVector.combine({m: normalized[m][eid] for m in normalized})
        for eid in candidates
    }


def score_all(text: str, context: CandidateContext, snapshot: KnowledgeSnapshot,
              config: Optional[ScorerConfig] = None) -> Dict[Tuple[Mention, int], ScoreVector]:
    """Score every (mention, candidate) pair of a document."""
    config = config or ScorerConfig()
    doc_terms = document_terms(text) if "textual" in config.enabled_modules else None
    out: Dict[Tuple[Mention, int], ScoreVector] = {}
    for mention in context.per_mention:
        for eid, vec in score_mention(mention, text, context, snapshot, config, doc_terms).items():
            out[(mention, eid)] = vec
    return out
