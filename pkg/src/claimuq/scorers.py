"""Token-level uncertainty scorers computed from stored candidate logits.

Each scorer maps a sample to one value per token. Softmax is computed with
max-subtraction, so raw logits and log-softmax inputs give identical
results. Orientation (is a higher value more uncertain?) travels with the
vector as metadata; nothing here flips signs.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .model import (
    CANDIDATES_PER_TOKEN,
    ExternalScoreMeta,
    Sample,
    ScorerConfig,
    TokenScoreVector,
)

__all__ = [
    "softmax_over_candidates",
    "token_likelihood",
    "max_likelihood",
    "token_entropy",
    "ingest_external_scores",
    "IngestError",
]

log = logging.getLogger(__name__)

_CANONICAL_TOP_K = (5, 10, 24)


class IngestError(ValueError):
    """An external score file is inconsistent with the samples it targets."""


def _logit_matrix(sample: Sample) -> np.ndarray:
    if not sample.tokens:
        return np.empty((0, CANDIDATES_PER_TOKEN))
    m = np.array(
        [[lg for _, lg in tok.candidates] for tok in sample.tokens],
        dtype=np.float64,
    )
    if m.ndim != 2 or m.shape[1] != CANDIDATES_PER_TOKEN:
        raise ValueError(f"sample {sample.id}: malformed candidate logits")
    return m


def _softmax_rows(m: np.ndarray) -> np.ndarray:
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_over_candidates(
    logits: Sequence[float], top_k: int = CANDIDATES_PER_TOKEN
) -> np.ndarray:
    """Probabilities over the ``top_k`` highest-logit candidates.

    The input must already be sorted by logit, highest first; the first
    ``top_k`` entries are renormalized among themselves.
    """
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("logits must be one-dimensional")
    if not 1 <= top_k <= arr.shape[0]:
        raise ValueError(f"top_k {top_k} out of range for {arr.shape[0]} logits")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    return _softmax_rows(arr[None, :top_k])[0]


def token_likelihood(sample: Sample) -> TokenScoreVector:
    """Probability of the sampled candidate under the full 24-way softmax.

    Confidence-oriented: higher means more certain.
    """
    probs = _softmax_rows(_logit_matrix(sample)) if sample.tokens else np.empty((0, 0))
    ranks = np.array([t.sampled_rank for t in sample.tokens], dtype=np.intp)
    if ranks.size and not ((ranks >= 0) & (ranks < CANDIDATES_PER_TOKEN)).all():
        raise ValueError(f"sample {sample.id}: sampled_rank out of range")
    values = probs[np.arange(len(sample.tokens)), ranks] if ranks.size else np.empty(0)
    return TokenScoreVector(
        sample_id=sample.id,
        scorer="token_likelihood",
        values=tuple(float(v) for v in values),
        higher_is_more_uncertain=False,
    )


def max_likelihood(sample: Sample) -> TokenScoreVector:
    """Probability of the top-ranked candidate, whether or not it was sampled.

    Confidence-oriented; never below token_likelihood for the same token.
    """
    probs = _softmax_rows(_logit_matrix(sample))
    values = probs[:, 0] if len(sample.tokens) else np.empty(0)
    return TokenScoreVector(
        sample_id=sample.id,
        scorer="max_likelihood",
        values=tuple(float(v) for v in values),
        higher_is_more_uncertain=False,
    )


def token_entropy(
    sample: Sample, config: ScorerConfig = ScorerConfig()
) -> TokenScoreVector:
    """Shannon entropy (nats) of the renormalized top-k candidate softmax.

    Bounded by [0, ln k]. Uncertainty-oriented: higher means more uncertain.
    """
    k = config.entropy_top_k
    if k not in _CANONICAL_TOP_K:
        log.warning("entropy_top_k=%d is not a canonical setting %s",
                    k, _CANONICAL_TOP_K)
    m = _logit_matrix(sample)
    if m.size:
        p = _softmax_rows(m[:, :k])
        h = -np.sum(np.where(p > 0.0, p * np.log(p), 0.0), axis=1)
    else:
        h = np.empty(0)
    return TokenScoreVector(
        sample_id=sample.id,
        scorer=f"token_entropy-{k}",
        values=tuple(float(v) for v in h),
        higher_is_more_uncertain=True,
    )


def ingest_external_scores(
    path: str | Path,
    meta: ExternalScoreMeta,
    token_counts: Mapping[str, int],
) -> dict[str, TokenScoreVector]:
    """Load precomputed token scores from a JSONL file.

    Rows look like ``{"sample_id": ..., "scorer": ..., "values": [...]}``.
    Every row must reference a known sample id, carry one finite value per
    token, and no id may appear twice. Problems raise IngestError naming
    the offending row.
    """
    out: dict[str, TokenScoreVector] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            sid = row.get("sample_id")
            if sid not in token_counts:
                raise IngestError(f"{path}:{lineno}: unknown sample id {sid!r}")
            if sid in out:
                raise IngestError(f"{path}:{lineno}: duplicate sample id {sid!r}")
            values = np.asarray(row.get("values", []), dtype=np.float64)
            if values.ndim != 1 or values.shape[0] != token_counts[sid]:
                raise IngestError(
                    f"{path}:{lineno}: expected {token_counts[sid]} values "
                    f"for {sid!r}, got {values.shape}"
                )
            if values.size and not np.all(np.isfinite(values)):
                raise IngestError(f"{path}:{lineno}: non-finite value for {sid!r}")
            out[sid] = TokenScoreVector(
                sample_id=sid,
                scorer=meta.scorer_name,
                values=tuple(float(v) for v in values),
                higher_is_more_uncertain=meta.higher_is_more_uncertain,
            )
    return out
