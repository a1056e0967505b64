"""Language-independent tokenization and wiki-link rendering."""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache
from typing import List

# [[Target]] or [[Target|anchor]]; nested brackets are not links.
LINK_RE = re.compile(r"\[\[([^\[\]|]*)(?:\|([^\[\]]*))?\]\]")


@lru_cache(maxsize=65536)
def _is_separator(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> List[str]:
    """Split on whitespace and Unicode punctuation, then case-fold.

    No stemming and no stop words, so the same rule works for any script.

    >>> tokenize("Saadi was born in Shiraz.")
    ['saadi', 'was', 'born', 'in', 'shiraz']
    """
    tokens: List[str] = []
    current: List[str] = []
    for ch in text:
        if _is_separator(ch):
            if current:
                tokens.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    # Folding can introduce separators (rare), so split again afterwards.
    out: List[str] = []
    for tok in tokens:
        folded = tok.casefold()
        if any(_is_separator(c) for c in folded):
            out.extend(tokenize(folded))
        elif folded:
            out.append(folded)
    return out


def fold(text: str) -> str:
    """Case-fold a title or surface form for lookup."""
    return unicodedata.normalize("NFC", text).casefold().strip()


def render_links(body: str) -> str:
    """Replace link markup by its visible text (anchor if given, else target)."""

    def _visible(m: re.Match) -> str:
        return m.group(2) if m.group(2) is not None else m.group(1)

    return LINK_RE.sub(_visible, body)
