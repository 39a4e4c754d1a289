"""Rule-based sentence splitting for paragraph chunks.

Splits on terminal punctuation (``.``, ``!``, ``?``, ``;``) followed by
whitespace and an uppercase letter or digit, with an abbreviation stop-list
to suppress false breaks. Deterministic, no model dependency.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

TERMINALS = ".!?;"

_DEFAULT_ABBREV_RESOURCE = "abbreviations.txt"


def load_abbreviations(path=None) -> frozenset[str]:
    """Load the abbreviation stop-list (one token per line, ``#`` comments)."""
    if path is None:
        text = (
            resources.files("resqa.data")
            .joinpath(_DEFAULT_ABBREV_RESOURCE)
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    tokens = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.add(line)
    return frozenset(tokens)


@lru_cache(maxsize=1)
def _default_abbreviations() -> frozenset[str]:
    return load_abbreviations()


def split_sentences(paragraph: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Split one paragraph into sentences.

    Every returned sentence is a contiguous substring of ``paragraph``
    (edge whitespace stripped) and none is empty; joining them back with
    single spaces reproduces the input modulo whitespace.
    """
    if not paragraph or not paragraph.strip():
        return []
    if abbreviations is None:
        abbreviations = _default_abbreviations()

    breaks = []
    n = len(paragraph)
    for i, ch in enumerate(paragraph):
        if ch not in TERMINALS:
            continue
        # Require whitespace, then an uppercase letter or digit, after the mark.
        j = i + 1
        if j >= n or not paragraph[j].isspace():
            continue
        while j < n and paragraph[j].isspace():
            j += 1
        if j >= n or not (paragraph[j].isupper() or paragraph[j].isdigit()):
            continue
        if ch == "." and _token_before(paragraph, i) in abbreviations:
            continue
        breaks.append(i + 1)

    pieces = []
    start = 0
    for b in breaks:
        piece = paragraph[start:b].strip()
        if piece:
            pieces.append(piece)
        start = b
    tail = paragraph[start:].strip()
    if tail:
        pieces.append(tail)
    return pieces


def _token_before(text: str, dot_index: int) -> str:
    """Whitespace-delimited token ending at (and including) ``text[dot_index]``."""
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : dot_index + 1]
