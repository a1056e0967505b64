"""Dump parsing and snapshot construction.

Dump format (UTF-8, line-delimited)::

    #PAGE<TAB>kind<TAB>title
    #INFOBOX<TAB>type            (optional)
    #REDIRECT<TAB>target         (redirect pages only)
    #DISAMBIG<TAB>target         (one per target, disambiguation pages only)
    body lines ...               (a literal leading '#' is written '##')

Articles and redirects share one title namespace; disambiguation pages live
in their own, so "Saadi" may be both an article and a disambiguation page.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, TextIO, Tuple, Union

from .errors import ConflictError, DumpParseError, SnapshotError
from .text import LINK_RE, fold, render_links, tokenize

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAGIC = "wikied-snapshot"
MAX_REDIRECT_DEPTH = 16


class PageKind(str, enum.Enum):
    ARTICLE = "article"
    REDIRECT = "redirect"
    DISAMBIGUATION = "disambiguation"


@dataclass(frozen=True)
class DumpRecord:
    title: str
    kind: PageKind
    infobox_type: Optional[str] = None
    redirect_target: Optional[str] = None
    disambig_targets: Tuple[str, ...] = ()
    body: str = ""

    def validate(self) -> None:
        """Raise ConflictError if the record breaks a per-kind invariant."""
        if not self.title.strip():
            raise ConflictError("page with empty title")
        if self.kind is PageKind.REDIRECT:
            if not self.redirect_target:
                raise ConflictError(f"redirect {self.title!r} has no target")
            if self.body.strip():
                raise ConflictError(f"redirect {self.title!r} has a body")
        elif self.redirect_target is not None:
            raise ConflictError(f"{self.kind.value} {self.title!r} carries a #REDIRECT line")
        if self.kind is PageKind.DISAMBIGUATION:
            if not self.disambig_targets:
                raise ConflictError(f"disambiguation page {self.title!r} lists no targets")
        elif self.disambig_targets:
            raise ConflictError(f"{self.kind.value} {self.title!r} carries #DISAMBIG lines")


LinkList = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class SnapshotManifest:
    entity_count: int
    redirect_count: int
    disambig_count: int
    vocabulary_size: int
    build_timestamp: int
    format_version: int = FORMAT_VERSION

    def summary(self) -> str:
        return (
            f"entities={self.entity_count} redirects={self.redirect_count} "
            f"disambiguations={self.disambig_count} vocabulary={self.vocabulary_size} "
            f"format_version={self.format_version}"
        )


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _namespace(kind: PageKind) -> str:
    return "disambig" if kind is PageKind.DISAMBIGUATION else "main"


def parse_dump(stream: Union[TextIO, Iterable[str], str]) -> List[DumpRecord]:
    """Parse a dump stream into records, one per ``#PAGE`` header.

    Accepts an open text stream, any iterable of lines, or the whole dump as
    a string. Link markup in bodies is kept verbatim.
    """
    if isinstance(stream, str):
        lines: Iterable[str] = stream.splitlines()
    else:
        lines = stream

    records: List[DumpRecord] = []
    seen: Dict[Tuple[str, str], int] = {}
    page: Optional[dict] = None

    def finish() -> None:
        if page is None:
            return
        record = DumpRecord(
            title=page["title"],
            kind=page["kind"],
            infobox_type=page["infobox"],
            redirect_target=page["redirect"],
            disambig_targets=tuple(page["disambig"]),
            body="\n".join(page["body"]).strip("\n"),
        )
        try:
            record.validate()
        except ConflictError as exc:
            raise DumpParseError(str(exc), page["line"]) from None
        records.append(record)

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#PAGE"):
            finish()
            parts = line.split("\t")
            if len(parts) != 3 or parts[0] != "#PAGE":
                raise DumpParseError("malformed #PAGE header, expected '#PAGE<TAB>kind<TAB>title'", lineno)
            try:
                kind = PageKind(parts[1])
            except ValueError:
                raise DumpParseError(f"unknown page kind {parts[1]!r}", lineno) from None
            title = parts[2].strip()
            if not title:
                raise DumpParseError("empty page title", lineno)
            key = (_namespace(kind), title)
            if key in seen:
                raise ConflictError(f"duplicate title {title!r} (lines {seen[key]} and {lineno})")
            seen[key] = lineno
            page = {"title": title, "kind": kind, "infobox": None, "redirect": None,
                    "disambig": [], "body": [], "line": lineno}
            continue

        if page is None:
            if line.strip():
                raise DumpParseError("content before the first #PAGE header", lineno)
            continue

        if line.startswith("##"):
            page["body"].append(line[1:])
        elif line.startswith("#"):
            directive, _, value = line.partition("\t")
            value = value.strip()
            if page["body"]:
                raise DumpParseError(f"header line {directive!r} after body text", lineno)
            if directive == "#INFOBOX" and value:
                if page["infobox"] is not None:
                    raise DumpParseError("repeated #INFOBOX line", lineno)
                page["infobox"] = value
            elif directive == "#REDIRECT" and value:
                if page["redirect"] is not None:
                    raise DumpParseError("repeated #REDIRECT line", lineno)
                page["redirect"] = value
            elif directive == "#DISAMBIG" and value:
                page["disambig"].append(value)
            else:
                raise DumpParseError(f"malformed record header {line!r}", lineno)
        else:
            if page["body"] or line.strip():
                page["body"].append(line)
    finish()
    return records


def write_dump(records: Iterable[DumpRecord]) -> str:
    """Serialize records back to the dump format (inverse of parse_dump)."""
    out: List[str] = []
    for rec in records:
        out.append(f"#PAGE\t{rec.kind.value}\t{rec.title}")
        if rec.infobox_type:
            out.append(f"#INFOBOX\t{rec.infobox_type}")
        if rec.redirect_target:
            out.append(f"#REDIRECT\t{rec.redirect_target}")
        for target in rec.disambig_targets:
            out.append(f"#DISAMBIG\t{target}")
        for line in rec.body.splitlines():
            out.append("#" + line if line.startswith("#") else line)
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# Title resolution and link extraction
# ---------------------------------------------------------------------------

class TitleResolver:
    """Maps titles (articles or redirects) to article ids.

    Exact title wins over a case-folded match; among case-folded collisions
    the earliest page in dump order wins.
    """

    def __init__(self, articles: Mapping[str, int], redirect_map: Mapping[str, str]):
        self.articles = dict(articles)
        self.redirect_map = dict(redirect_map)
        self._folded_articles: Dict[str, int] = {}
        for title, eid in sorted(self.articles.items(), key=lambda kv: kv[1]):
            self._folded_articles.setdefault(fold(title), eid)
        self._folded_redirects: Dict[str, str] = {}
        for title in self.redirect_map:
            self._folded_redirects.setdefault(fold(title), title)
        self._redirect_cache: Dict[str, Optional[int]] = {}

    def follow(self, redirect_title: str) -> Optional[int]:
        """Follow a redirect chain to its final article; None if it dangles."""
        if redirect_title in self._redirect_cache:
            return self._redirect_cache[redirect_title]
        chain = [redirect_title]
        current = redirect_title
        result: Optional[int] = None
        while True:
            target = self.redirect_map[current]
            if target in self.articles:
                result = self.articles[target]
                break
            if target not in self.redirect_map:
                folded = fold(target)
                if folded in self._folded_articles:
                    result = self._folded_articles[folded]
                    break
                if folded in self._folded_redirects:
                    target = self._folded_redirects[folded]
                else:
                    break
            if target in chain:
                cycle = " -> ".join(chain[chain.index(target):] + [target])
                raise ConflictError(f"redirect cycle: {cycle}")
            chain.append(target)
            if len(chain) > MAX_REDIRECT_DEPTH + 1:
                raise ConflictError(
                    f"redirect chain from {redirect_title!r} deeper than {MAX_REDIRECT_DEPTH}"
                )
            current = target
        self._redirect_cache[redirect_title] = result
        return result

    def resolve(self, title: str) -> Optional[int]:
        title = title.strip()
        if title in self.articles:
            return self.articles[title]
        if title in self.redirect_map:
            return self.follow(title)
        folded = fold(title)
        if folded in self._folded_articles:
            return self._folded_articles[folded]
        if folded in self._folded_redirects:
            return self.follow(self._folded_redirects[folded])
        return None


def extract_links(
    body: str,
    title_index: Mapping[str, int],
    redirect_map: Mapping[str, str],
    *,
    self_id: Optional[int] = None,
    resolver: Optional[TitleResolver] = None,
) -> LinkList:
    """Count resolved link targets in ``body``, in first-occurrence order.

    ``title_index`` maps article titles to ids and ``redirect_map`` maps
    redirect titles to their (possibly redirecting) targets. Links to unknown
    titles and links back to ``self_id`` are dropped.
    """
    if resolver is None:
        resolver = TitleResolver(title_index, redirect_map)
    counts: Dict[int, int] = {}
    for m in LINK_RE.finditer(body):
        target = m.group(1).split("#", 1)[0].strip()
        if not target:
            continue
        eid = resolver.resolve(target)
        if eid is None or eid == self_id:
            continue
        counts[eid] = counts.get(eid, 0) + 1
    return tuple(counts.items())


# ---------------------------------------------------------------------------
# Snapshot construction
# ---------------------------------------------------------------------------

def _check_unique(records: Iterable[DumpRecord]) -> None:
    seen = set()
    for rec in records:
        rec.validate()
        key = (_namespace(rec.kind), rec.title)
        if key in seen:
            raise ConflictError(f"duplicate title {rec.title!r}")
        seen.add(key)


def snapshot_payload(records: List[DumpRecord]) -> dict:
    """Compute every snapshot section from validated records."""
    _check_unique(records)
    articles = [r for r in records if r.kind is PageKind.ARTICLE]
    title_to_id = {r.title: i for i, r in enumerate(articles)}
    redirect_src = {r.title: r.redirect_target for r in records if r.kind is PageKind.REDIRECT}
    resolver = TitleResolver(title_to_id, redirect_src)

    redirects: Dict[str, int] = {}
    for title in redirect_src:
        eid = resolver.follow(title)
        if eid is None:
            logger.warning("redirect %r points to a missing page; dropped", title)
        else:
            redirects[title] = eid

    disambig: Dict[str, List[int]] = {}
    for rec in records:
        if rec.kind is not PageKind.DISAMBIGUATION:
            continue
        ids: List[int] = []
        for target in rec.disambig_targets:
            eid = resolver.resolve(target)
            if eid is None:
                logger.warning("disambiguation %r lists unknown %r; dropped", rec.title, target)
            elif eid not in ids:
                ids.append(eid)
        disambig[rec.title] = ids

    entities = []
    doc_freq: Counter = Counter()
    for eid, rec in enumerate(articles):
        terms = Counter(tokenize(render_links(rec.body)))
        doc_freq.update(terms.keys())
        links = extract_links(rec.body, title_to_id, redirect_src, self_id=eid, resolver=resolver)
        entities.append({
            "title": rec.title,
            "infobox_type": rec.infobox_type,
            "terms": dict(sorted(terms.items())),
            "links": [list(pair) for pair in links],
        })

    title_index: Dict[str, int] = {}
    for eid, rec in enumerate(articles):
        title_index.setdefault(fold(rec.title), eid)

    return {
        "entities": entities,
        "redirects": dict(sorted(redirects.items())),
        "disambig": {k: disambig[k] for k in sorted(disambig)},
        "doc_freq": dict(sorted(doc_freq.items())),
        "title_index": dict(sorted(title_index.items())),
    }


def _default_timestamp() -> int:
    # Reproducible-builds convention; 0 keeps output byte-identical.
    return int(os.environ.get("SOURCE_DATE_EPOCH", "0"))


def encode_snapshot(records: List[DumpRecord], build_timestamp: Optional[int] = None) -> bytes:
    """Serialize records into snapshot bytes (header line + payload)."""
    payload = snapshot_payload(records)
    body = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")
    manifest = SnapshotManifest(
        entity_count=len(payload["entities"]),
        redirect_count=len(payload["redirects"]),
        disambig_count=len(payload["disambig"]),
        vocabulary_size=len(payload["doc_freq"]),
        build_timestamp=_default_timestamp() if build_timestamp is None else int(build_timestamp),
    )
    header = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "manifest": manifest.__dict__,
        "payload_bytes": len(body),
        "payload_sha256": hashlib.sha256(body).hexdigest(),
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return head + b"\n" + body


def build_snapshot(
    records: List[DumpRecord],
    path: Union[str, Path],
    build_timestamp: Optional[int] = None,
) -> SnapshotManifest:
    """Build a snapshot from records and write it atomically to ``path``."""
    data = encode_snapshot(records, build_timestamp)
    header = json.loads(data.split(b"\n", 1)[0])
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    except OSError as exc:
        raise SnapshotError(f"cannot write snapshot to {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise SnapshotError(f"cannot write snapshot to {path}: {exc}") from exc
    return SnapshotManifest(**header["manifest"])


def build_snapshot_from_dump(dump_path: Union[str, Path], out_path: Union[str, Path],
                             build_timestamp: Optional[int] = None) -> SnapshotManifest:
    with open(dump_path, encoding="utf-8") as fh:
        records = parse_dump(fh)
    return build_snapshot(records, out_path, build_timestamp)
