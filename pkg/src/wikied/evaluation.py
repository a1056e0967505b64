"""Gold corpora (native JSON lines and a NIF subset) and micro-F1 scoring."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
from urllib.parse import unquote

from .candidates import NIL, Document, Mention
from .errors import CorpusError, InputError
from .linker import LinkerConfig, link_corpus
from .scoring import ScorerConfig
from .store import KnowledgeSnapshot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Corpus:
    documents: Tuple[Document, ...] = ()

    def __post_init__(self):
        ids = [d.doc_id for d in self.documents]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise CorpusError(f"duplicate doc_id {dup!r}")

    def __add__(self, other: "Corpus") -> "Corpus":
        return Corpus(self.documents + other.documents)

    @property
    def mention_count(self) -> int:
        return sum(len(d.mentions) for d in self.documents)


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    micro_precision: float
    micro_recall: float
    micro_f1: float
    per_document: Dict[str, Counts] = field(default_factory=dict)

    @classmethod
    def from_counts(cls, counts: Counts, per_document: Optional[Dict[str, Counts]] = None) -> "EvalReport":
        p = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 1.0
        r = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(counts.tp, counts.fp, counts.fn, p, r, f1, dict(per_document or {}))

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "per_document": {k: [c.tp, c.fp, c.fn] for k, c in sorted(self.per_document.items())},
        }

    def format_text(self) -> str:
        return "\n".join([
            f"documents        {len(self.per_document)}",
            f"tp/fp/fn         {self.tp}/{self.fp}/{self.fn}",
            f"micro_precision  {self.micro_precision:.4f}",
            f"micro_recall     {self.micro_recall:.4f}",
            f"micro_f1         {self.micro_f1:.4f}",
        ])


def _canonical_gold(gold: Optional[str], snapshot: Optional[KnowledgeSnapshot], where: str) -> Optional[str]:
    if gold is None or gold == NIL or snapshot is None:
        return gold
    eid = snapshot.resolve_title(gold)
    if eid is None:
        logger.warning("%s: gold %r not in snapshot; treated as NIL", where, gold)
        return NIL
    return snapshot.title(eid)


# ---------------------------------------------------------------------------
# Native format: one JSON object per line
#   {"doc_id": ..., "text": ..., "mentions": [{"start", "end", "surface", "gold"}]}
# ---------------------------------------------------------------------------

def _load_native(path: Path, snapshot: Optional[KnowledgeSnapshot]) -> Corpus:
    docs: List[Document] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc_id = str(obj["doc_id"])
                text = obj["text"]
                raw_mentions = obj.get("mentions", [])
                if not isinstance(text, str) or not isinstance(raw_mentions, list):
                    raise TypeError("'text' must be a string and 'mentions' a list")
                mentions = []
                for rm in raw_mentions:
                    start, end = int(rm["start"]), int(rm["end"])
                    surface = rm.get("surface", text[start:end] if 0 <= start < end else "")
                    gold = rm.get("gold")
                    gold = _canonical_gold(gold, snapshot, f"{path}:{lineno}")
                    m = Mention(doc_id, start, end, surface, gold)
                    m.check(text)
                    mentions.append(m)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: invalid JSON: {exc.msg}", lineno) from None
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: bad document record: {exc!r}", lineno) from None
            except InputError as exc:
                raise CorpusError(f"{path}: {exc}", lineno) from None
            docs.append(Document(doc_id, text, tuple(sorted(mentions, key=lambda m: (m.start, m.end)))))
    return Corpus(tuple(docs))


def dump_native(corpus: Corpus) -> str:
    lines = []
    for d in corpus.documents:
        lines.append(json.dumps({
            "doc_id": d.doc_id,
            "text": d.text,
            "mentions": [{"start": m.start, "end": m.end, "surface": m.surface, "gold": m.gold}
                         for m in d.mentions],
        }, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# NIF subset: N-Triples lines using nif:isString, nif:beginIndex,
# nif:endIndex, nif:anchorOf, nif:referenceContext and itsrdf:taIdentRef.
# ---------------------------------------------------------------------------

_TERM = r'(<[^>]*>|_:\S+|"(?:[^"\\]|\\.)*"(?:\^\^(?:<[^>]*>|\S+?)|@[A-Za-z0-9-]+)?|[A-Za-z_][\w.-]*:\S*?)'
_TRIPLE_RE = re.compile(r"^\s*" + _TERM + r"\s+" + _TERM + r"\s+" + _TERM + r"\s*\.\s*$")
_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_ESC_RE = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)")


def _unescape(s: str) -> str:
    def sub(m: re.Match) -> str:
        g = m.group(1)
        if g[0] in "uU":
            return chr(int(g[1:], 16))
        if g in _ESCAPES:
            return _ESCAPES[g]
        raise ValueError(f"bad escape \\{g}")
    return _ESC_RE.sub(sub, s)


def _local_name(term: str) -> str:
    iri = term[1:-1] if term.startswith("<") else term
    for sep in ("#", "/", ":"):
        if sep in iri:
            iri = iri.rsplit(sep, 1)[1]
    return iri


def _literal(term: str) -> str:
    if not term.startswith('"'):
        raise ValueError(f"expected a literal, got {term}")
    end = term.rfind('"')
    return _unescape(term[1:end])


def _node(term: str) -> str:
    return term[1:-1] if term.startswith("<") else term


def resource_title(iri: str) -> str:
    """Final path segment of a resource IRI as a page title."""
    seg = iri.rstrip("/").rsplit("/", 1)[-1]
    return unquote(seg).replace("_", " ")


_NIF_PROPS = {"isString", "beginIndex", "endIndex", "anchorOf", "referenceContext", "taIdentRef"}


def _load_nif(path: Path, snapshot: Optional[KnowledgeSnapshot]) -> Corpus:
    subjects: Dict[str, Dict[str, Tuple[str, int]]] = {}
    order: List[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#") or stripped.startswith("@prefix"):
                continue
            m = _TRIPLE_RE.match(stripped)
            if not m:
                raise CorpusError(f"{path}: not a triple: {stripped[:60]!r}", lineno)
            subj, pred, obj = m.groups()
            prop = _local_name(pred)
            if prop not in _NIF_PROPS:
                continue
            s = _node(subj)
            if s not in subjects:
                subjects[s] = {}
                order.append(s)
            try:
                if prop in ("isString", "anchorOf"):
                    value = _literal(obj)
                elif prop in ("beginIndex", "endIndex"):
                    value = str(int(_literal(obj)))
                else:
                    value = _node(obj)
            except ValueError as exc:
                raise CorpusError(f"{path}: {exc}", lineno) from None
            subjects[s][prop] = (value, lineno)

    contexts = {s: props["isString"][0] for s, props in subjects.items() if "isString" in props}

    def owner(s: str, props: dict) -> Optional[str]:
        if "referenceContext" in props:
            return props["referenceContext"][0]
        base = s.split("#", 1)[0]
        hits = [c for c in contexts if c.split("#", 1)[0] == base]
        return hits[0] if len(hits) == 1 else None

    mentions: Dict[str, List[Mention]] = {c: [] for c in contexts}
    for s in order:
        props = subjects[s]
        if s in contexts or "beginIndex" not in props and "endIndex" not in props:
            continue
        if "beginIndex" not in props or "endIndex" not in props:
            line = (props.get("beginIndex") or props.get("endIndex"))[1]
            raise CorpusError(f"{path}: phrase {s} lacks beginIndex or endIndex", line)
        begin, end = int(props["beginIndex"][0]), int(props["endIndex"][0])
        line = props["endIndex"][1]
        if end < begin:
            raise CorpusError(f"{path}: phrase {s} has endIndex {end} < beginIndex {begin}", line)
        ctx = owner(s, props)
        if ctx is None or ctx not in contexts:
            raise CorpusError(f"{path}: phrase {s} has no resolvable context", line)
        text = contexts[ctx]
        surface = props["anchorOf"][0] if "anchorOf" in props else text[begin:end]
        gold = resource_title(props["taIdentRef"][0]) if "taIdentRef" in props else NIL
        gold = _canonical_gold(gold, snapshot, f"{path}:{line}")
        mention = Mention(ctx, begin, end, surface, gold)
        try:
            mention.check(text)
        except InputError as exc:
            raise CorpusError(f"{path}: {exc}", line) from None
        mentions[ctx].append(mention)

    docs = [
        Document(c, contexts[c], tuple(sorted(mentions[c], key=lambda m: (m.start, m.end))))
        for c in order if c in contexts
    ]
    return Corpus(tuple(docs))


def load_corpus(path: Union[str, Path], format: str = "native",
                snapshot: Optional[KnowledgeSnapshot] = None) -> Corpus:
    """Load gold documents; with ``snapshot``, gold titles are canonicalized.

    ``format`` is ``"native"`` (JSON lines) or ``"nif"`` (N-Triples subset).
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus not found: {path}")
    if format == "native":
        return _load_native(path, snapshot)
    if format in ("nif", "nif_subset"):
        return _load_nif(path, snapshot)
    raise InputError(f"unknown corpus format {format!r}")


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def _gold_id(gold: Optional[str], snapshot: KnowledgeSnapshot) -> Optional[int]:
    if gold is None or gold == NIL:
        return None
    return snapshot.resolve_title(gold)


def count_mention(predicted: Optional[int], gold: Optional[int]) -> Counts:
    """Strong-match counts for one mention (None means NIL)."""
    if predicted is None:
        return Counts(fn=1) if gold is not None else Counts()
    if gold is None:
        return Counts(fp=1)
    if predicted == gold:
        return Counts(tp=1)
    return Counts(fp=1, fn=1)


def evaluate(corpus: Corpus, snapshot: KnowledgeSnapshot,
             scorer_config: Optional[ScorerConfig] = None,
             linker_config: Optional[LinkerConfig] = None,
             workers: int = 1) -> EvalReport:
    annotations = link_corpus(corpus.documents, snapshot, scorer_config, linker_config, workers)
    per_doc: Dict[str, Counts] = {d.doc_id: Counts() for d in corpus.documents}
    for ann in annotations:
        c = count_mention(ann.decision, _gold_id(ann.mention.gold, snapshot))
        per_doc[ann.mention.doc_id] = per_doc[ann.mention.doc_id] + c
    total = Counts()
    for c in per_doc.values():
        total = total + c
    return EvalReport.from_counts(total, per_doc)


def report_from_predictions(pairs: Sequence[Tuple[Optional[int], Optional[int]]]) -> EvalReport:
    """Micro report straight from (predicted, gold) id pairs."""
    total = Counts()
    for pred, gold in pairs:
        total = total + count_mention(pred, gold)
    return EvalReport.from_counts(total)
