"""Stop set: the words and punctuation marks that never open a claim.

The default set is the union of the packaged English, French, Spanish and
German stopword lists plus the packaged punctuation list. The lists are
plain UTF-8 text, one entry per line, and can be replaced wholesale with
``StopSet.from_paths`` (a file or a directory of ``*.txt`` files).
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

__all__ = ["StopSet", "load_default_stops"]

_DATA_FILES = (
    "stopwords_en.txt",
    "stopwords_fr.txt",
    "stopwords_es.txt",
    "stopwords_de.txt",
    "punctuation.txt",
)


def _normalize(word: str) -> str:
    # U+2019 is the apostrophe LLM text actually emits.
    return word.casefold().replace("’", "'")


@dataclass(frozen=True, slots=True)
class StopSet:
    """Case-folded membership set for stopwords and punctuation.

    A word counts as a stop if its normalized form is an entry, or if every
    one of its characters is an entry (so punctuation runs like "?!" or
    "...." are stops without enumerating each combination).
    """

    entries: frozenset[str]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("stop set is empty")

    def __contains__(self, word: str) -> bool:
        w = _normalize(word)
        if w in self.entries:
            return True
        # Punctuation-run fallback; the isalnum guard keeps letter entries
        # like "i" + "a" from combining into false positives.
        return len(w) > 1 and all(
            not ch.isalnum() and ch in self.entries for ch in w
        )

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def from_words(words: Iterable[str]) -> StopSet:
        entries = frozenset(_normalize(w.strip()) for w in words if w.strip())
        return StopSet(entries)

    @staticmethod
    def from_paths(*paths: str | Path) -> StopSet:
        """Load entries from text files or directories of ``*.txt`` files."""
        words: list[str] = []
        for p in paths:
            p = Path(p)
            files = sorted(p.glob("*.txt")) if p.is_dir() else [p]
            if not files:
                raise FileNotFoundError(f"no *.txt files under {p}")
            for f in files:
                words.extend(_read_entries(f.read_text(encoding="utf-8")))
        return StopSet.from_words(words)


def _read_entries(blob: str) -> list[str]:
    return [line.strip() for line in blob.splitlines() if line.strip()]


def load_default_stops() -> StopSet:
    """The packaged four-language stopword union plus punctuation."""
    words: list[str] = []
    root = resources.files(__package__) / "data"
    for name in _DATA_FILES:
        words.extend(_read_entries((root / name).read_text(encoding="utf-8")))
    return StopSet.from_words(words)
