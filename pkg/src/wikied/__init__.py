"""Unsupervised, language-independent entity disambiguation over a wiki link graph."""

from importlib import resources
from pathlib import Path

from .candidates import NIL, CandidateContext, Document, Mention, build_context, generate_candidates
from .errors import (
    ConflictError,
    ContractError,
    CorpusError,
    DumpParseError,
    InputError,
    SnapshotCorruptError,
    SnapshotError,
    SnapshotVersionError,
    WikiEDError,
)
from .evaluation import Corpus, EvalReport, evaluate, load_corpus
from .ingest import DumpRecord, PageKind, SnapshotManifest, build_snapshot, extract_links, parse_dump
from .linker import LinkedAnnotation, LinkerConfig, explain, link_corpus, link_document
from .scoring import (
    MODULES,
    ScorerConfig,
    ScoreVector,
    infobox_score,
    linkgraph_weight,
    normalize_mention_scores,
    score_all,
    textual_score,
)
from .store import Entity, KnowledgeSnapshot, load_snapshot
from .text import tokenize

__version__ = "0.1.0"

__all__ = [
    "NIL", "CandidateContext", "Document", "Mention", "build_context", "generate_candidates",
    "ConflictError", "ContractError", "CorpusError", "DumpParseError", "InputError",
    "SnapshotCorruptError", "SnapshotError", "SnapshotVersionError", "WikiEDError",
    "Corpus", "EvalReport", "evaluate", "load_corpus",
    "DumpRecord", "PageKind", "SnapshotManifest", "build_snapshot", "extract_links", "parse_dump",
    "LinkedAnnotation", "LinkerConfig", "explain", "link_corpus", "link_document",
    "MODULES", "ScorerConfig", "ScoreVector", "infobox_score", "linkgraph_weight",
    "normalize_mention_scores", "score_all", "textual_score",
    "Entity", "KnowledgeSnapshot", "load_snapshot", "tokenize", "data_path",
]


def data_path(name: str) -> Path:
    """Path of a bundled data file (``saadi.dump``, ``infobox_rules.json``, ...)."""
    return Path(str(resources.files(__name__).joinpath("data", name)))
