"""Rule-based claim segmentation over generated text.

A claim boundary opens at a stopword that does not directly follow another
stopword, and at the word after a sentence-final period. Boundaries are
character positions in the generation text; sampled tokens are then binned
into claims by where their span starts. The EOS token always forms its own
final claim.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Protocol, Sequence

from .model import ClaimPartition, Sample
from .stops import StopSet
from .words import WordSpan, tokenize_words

__all__ = ["find_claim_starts", "map_starts_to_claims", "segment", "segment_text"]


class _SpanLike(Protocol):
    char_start: int
    char_end: int
    is_eos: bool


def _pure_punctuation(word: str) -> bool:
    return bool(word) and not any(ch.isalnum() for ch in word)


def find_claim_starts(words: Sequence[WordSpan], stops: StopSet) -> list[int]:
    """Character positions where claims begin.

    Position 0 is always a start. A stopword opens a claim unless the
    previous word was also a stop (runs of stops collapse into one
    boundary). A word ending with a period, unless it is pure punctuation,
    opens a claim at the next word regardless of what that word is.
    """
    starts = [0]
    stop_prev = False
    stop_next = False
    for w in words:
        is_stop = w.text in stops
        if stop_next:
            starts.append(w.char_start)
        elif is_stop and not stop_prev:
            starts.append(w.char_start)
        stop_prev = is_stop
        stop_next = w.text.endswith(".") and not _pure_punctuation(w.text)
    out = []
    for s in starts:
        if not out or s > out[-1]:
            out.append(s)
    return out


def map_starts_to_claims(
    starts: Sequence[int], tokens: Sequence[_SpanLike]
) -> ClaimPartition:
    """Bin tokens into claims by containment of their char_start.

    Token i joins the claim whose [start_k, start_{k+1}) interval contains
    tokens[i].char_start; a token straddling a boundary therefore stays in
    the earlier claim. Claims left empty are dropped. The EOS token, if
    present, becomes the final single-token claim.
    """
    if not starts or starts[0] != 0:
        raise ValueError("starts must begin at 0")
    buckets: list[list[int]] = [[] for _ in starts]
    eos_claim: list[int] = []
    for i, tok in enumerate(tokens):
        if tok.is_eos:
            eos_claim.append(i)
            continue
        k = max(bisect_right(starts, tok.char_start) - 1, 0)
        buckets[k].append(i)
    claims = [tuple(b) for b in buckets if b]
    has_eos = bool(eos_claim)
    if has_eos:
        claims.append(tuple(eos_claim))
    return ClaimPartition(claims=tuple(claims), has_eos=has_eos)


def segment(sample: Sample, stops: StopSet) -> ClaimPartition:
    """Partition a sample's tokens into claims."""
    words = tokenize_words(sample.generation_text)
    starts = find_claim_starts(words, stops)
    return map_starts_to_claims(starts, sample.tokens)


@dataclass(frozen=True, slots=True)
class _LightToken:
    char_start: int
    char_end: int
    is_eos: bool


def segment_text(
    generation_text: str,
    token_offsets: Sequence[tuple[int, int]],
    stops: StopSet,
    *,
    eos_flags: Sequence[bool] | None = None,
) -> ClaimPartition:
    """Segment from raw offsets, without building full token records.

    ``eos_flags`` defaults to all-False; pass True for the terminal EOS
    entry when the offsets include one.
    """
    if eos_flags is None:
        eos_flags = [False] * len(token_offsets)
    if len(eos_flags) != len(token_offsets):
        raise ValueError("eos_flags length must match token_offsets")
    tokens = [
        _LightToken(s, e, eos) for (s, e), eos in zip(token_offsets, eos_flags)
    ]
    starts = find_claim_starts(tokenize_words(generation_text), stops)
    return map_starts_to_claims(starts, tokens)
