"""Claim-level aggregation of token scores.

Stopword and punctuation tokens are masked out before aggregating; a claim
whose tokens are all masked falls back to aggregating over all of its
tokens. GEOMEAN and PRODUCT run in log space so long claims cannot
underflow, with an exact-zero passthrough.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import (
    AggregatorKind,
    ClaimPartition,
    ClaimScoreSet,
    Sample,
    TokenScoreVector,
)
from .stops import StopSet

__all__ = ["content_token_mask", "aggregate", "AggregationError"]


class AggregationError(ValueError):
    pass


def content_token_mask(
    sample: Sample, partition: ClaimPartition, stops: StopSet
) -> list[bool]:
    """True for tokens that should contribute to claim scores.

    EOS and tokens whose whitespace-stripped surface is a stop are masked
    out. The partition is only consulted for a cheap alignment check.
    """
    n = sum(len(c) for c in partition.claims)
    if n != len(sample.tokens):
        raise AggregationError(
            f"sample {sample.id}: partition covers {n} tokens, "
            f"sample has {len(sample.tokens)}"
        )
    return [
        not tok.is_eos and tok.surface.strip() not in stops
        for tok in sample.tokens
    ]


def _reduce(values: np.ndarray, kind: AggregatorKind, scorer: str) -> float:
    if kind is AggregatorKind.MEAN:
        return float(values.mean())
    if kind is AggregatorKind.MAX:
        return float(values.max())
    if np.any(values < 0.0):
        raise AggregationError(
            f"{kind.value} aggregation needs nonnegative values, "
            f"scorer {scorer!r} produced negatives"
        )
    if kind is AggregatorKind.GEOMEAN:
        if np.any(values == 0.0):
            return 0.0
        return float(np.exp(np.mean(np.log(values))))
    if kind is AggregatorKind.PRODUCT:
        if np.any(values == 0.0):
            return 0.0
        return float(np.exp(np.sum(np.log(values))))
    raise AggregationError(f"unknown aggregator {kind!r}")


def aggregate(
    scores: TokenScoreVector,
    partition: ClaimPartition,
    mask: Sequence[bool],
    kind: AggregatorKind,
) -> ClaimScoreSet:
    """One aggregated value per non-EOS claim, in claim order."""
    values = np.asarray(scores.values, dtype=np.float64)
    if len(mask) != values.shape[0]:
        raise AggregationError(
            f"sample {scores.sample_id}: mask length {len(mask)} != "
            f"{values.shape[0]} token scores"
        )
    mask_arr = np.asarray(mask, dtype=bool)
    claims = partition.claims[:-1] if partition.has_eos else partition.claims
    out = []
    for claim in claims:
        if not claim:
            raise AggregationError(
                f"sample {scores.sample_id}: empty claim in partition")
        idx = np.asarray(claim, dtype=np.intp)
        if idx.max() >= values.shape[0] or idx.min() < 0:
            raise AggregationError(
                f"sample {scores.sample_id}: claim index out of range"
            )
        vals = values[idx]
        kept = vals[mask_arr[idx]]
        if kept.size == 0:
            kept = vals
        out.append(_reduce(kept, kind, scores.scorer))
    return ClaimScoreSet(
        sample_id=scores.sample_id,
        scorer=scores.scorer,
        aggregator=kind,
        values=tuple(out),
        higher_is_more_uncertain=scores.higher_is_more_uncertain,
    )
