"""Treebank-style word tokenizer that returns exact character spans.

The tokenizer never rewrites text; every span satisfies
``text[span.char_start:span.char_end] == span.text``, spans are ordered and
non-overlapping, and only whitespace falls between them.

Rules, in the order they apply:

* runs of three or more dots, the horizontal ellipsis, runs of two or more
  hyphens, and em/en dashes and the minus sign are single spans
* ; ! ? ( ) [ ] { } < > @ # $ % & and double-quote characters
  (" « » „ “ ” ‹ › plus inverted ?/! marks) always stand alone
* a comma or colon splits off unless the next character is a digit, so
  "1,699" and "14:30" stay whole
* a period never splits: word-final periods stay attached ("Qinghai.",
  "etc."), as do internal ones ("U.S.")
* English clitics split from the word end (do|n't, it|'s, we|'ll, ...),
  fused forms split at their conventional point (can|not, gon|na), and a
  bare apostrophe at the end of a word splits off; apostrophes between
  letters are kept ("l'homme"). U+2019 counts as an apostrophe.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["WordSpan", "tokenize_words"]


@dataclass(frozen=True, slots=True)
class WordSpan:
    text: str
    char_start: int
    char_end: int


# Characters that always form their own single-character span.
_SEPARATE = ";!?()[]{}<>\"«»„“”‚‹›¿¡@#$%&·•"

_APOSTROPHES = "'’"

_SCANNER = re.compile(
    r"""
    (?P<dots>\.{3,}|…)
  | (?P<dash>-{2,}|[—–−])
  | (?P<sep>[%s])
  | (?P<run>(?:(?!\.{3})(?!--)[^\s—–−%s])+)
    """ % (re.escape(_SEPARATE), re.escape(_SEPARATE)),
    re.VERBOSE,
)

# Word-final clitics, longest first. Both apostrophe forms accepted.
_CLITIC = re.compile(r"(?:n['’]t|['’](?:ll|re|ve|s|m|d))$", re.IGNORECASE)

# Fused words split at fixed points (offsets into the casefolded word).
_FUSED_SPLITS: dict[str, tuple[int, ...]] = {
    "cannot": (3,),
    "d'ye": (2,),
    "d’ye": (2,),
    "gimme": (3,),
    "gonna": (3,),
    "gotta": (3,),
    "lemme": (3,),
    "mor'n": (3,),
    "mor’n": (3,),
    "wanna": (3,),
    "'tis": (2,),
    "’tis": (2,),
    "'twas": (2,),
    "’twas": (2,),
    "whaddya": (4, 6),
    "whatcha": (3, 4),
}


def tokenize_words(text: str) -> list[WordSpan]:
    """Split ``text`` into word and punctuation spans with exact offsets."""
    spans: list[WordSpan] = []
    for m in _SCANNER.finditer(text):
        if m.lastgroup == "run":
            _split_run(text, m.start(), m.end(), spans)
        else:
            spans.append(WordSpan(m.group(), m.start(), m.end()))
    return spans


def _emit(text: str, start: int, end: int, out: list[WordSpan]) -> None:
    if end > start:
        out.append(WordSpan(text[start:end], start, end))


def _split_run(text: str, start: int, end: int, out: list[WordSpan]) -> None:
    # First pass: comma/colon boundaries (kept between digits).
    piece_start = start
    for i in range(start, end):
        ch = text[i]
        if ch in ",:" and not (i + 1 < end and text[i + 1].isdigit()):
            _split_word(text, piece_start, i, out)
            _emit(text, i, i + 1, out)
            piece_start = i + 1
    _split_word(text, piece_start, end, out)


def _split_word(text: str, start: int, end: int, out: list[WordSpan]) -> None:
    if end <= start:
        return

    # Trailing bare apostrophe is a closing quote ("dogs'").
    if text[end - 1] in _APOSTROPHES and not _CLITIC.search(text, start, end):
        _split_word(text, start, end - 1, out)
        _emit(text, end - 1, end, out)
        return

    # Peel clitics from the end: "can't've" -> ca + n't + 've.
    m = _CLITIC.search(text, start, end)
    if m is not None and m.start() > start:
        _split_word(text, start, m.start(), out)
        _emit(text, m.start(), end, out)
        return

    # Fused forms, matched ignoring any trailing punctuation tail
    # (so "Cannot." splits into "Can" + "not.").
    word = text[start:end]
    tail = 0
    while tail < len(word) and not word[len(word) - 1 - tail].isalnum():
        tail += 1
    core = word[: len(word) - tail].casefold()
    cuts = _FUSED_SPLITS.get(core)
    if cuts:
        prev = start
        for cut in cuts:
            _emit(text, prev, start + cut, out)
            prev = start + cut
        _emit(text, prev, end, out)
        return

    _emit(text, start, end, out)
