"""Core data model: samples, tokens, partitions, annotations, score vectors.

Everything is an immutable dataclass. Structural rules live in
``validate_sample``, which returns violation records instead of raising so
that loaders can report every problem in a file at once.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

__all__ = [
    "FORMAT_VERSION",
    "LANGUAGES",
    "CANDIDATES_PER_TOKEN",
    "TokenRecord",
    "Sample",
    "ClaimPartition",
    "AnnotationSet",
    "TokenScoreVector",
    "ClaimScoreSet",
    "ScorerConfig",
    "ExternalScoreMeta",
    "AggregatorKind",
    "Violation",
    "validate_sample",
    "sample_to_dict",
    "sample_from_dict",
    "partition_to_dict",
    "partition_from_dict",
    "annotations_to_dict",
    "annotations_from_dict",
    "token_scores_to_dict",
    "token_scores_from_dict",
    "claim_scores_to_dict",
    "claim_scores_from_dict",
    "partition_digest",
    "SchemaError",
]

# Canonical wire format tag for sample rows.
FORMAT_VERSION = "much-io/1"

LANGUAGES = ("EN", "FR", "ES", "DE")

# Every token ships this many (token_id, logit) candidates, highest logit first.
CANDIDATES_PER_TOKEN = 24


class SchemaError(ValueError):
    """A JSON row does not have the expected shape."""


class AggregatorKind(Enum):
    MEAN = "mean"
    MAX = "max"
    GEOMEAN = "geomean"
    PRODUCT = "product"


@dataclass(frozen=True, slots=True)
class TokenRecord:
    """One sampled token with its top-candidate logits.

    ``candidates`` holds exactly CANDIDATES_PER_TOKEN (token_id, logit) pairs
    sorted by logit, highest first. ``sampled_rank`` indexes the candidate
    that was actually sampled; a rank outside [0, 24) records a token that
    fell outside the stored candidates. An EOS token carries
    char_start == char_end == len(generation_text) and no surface text
    inside the generation.
    """

    surface: str
    char_start: int
    char_end: int
    sampled_rank: int
    candidates: tuple[tuple[int, float], ...]
    is_eos: bool = False


@dataclass(frozen=True, slots=True)
class Sample:
    """One question/generation pair with aligned token records."""

    id: str
    language: str
    model: str
    temperature: float
    question: str
    generation_text: str
    tokens: tuple[TokenRecord, ...]

    def eos_index(self) -> int | None:
        """Index of the terminal EOS token, or None if absent."""
        if self.tokens and self.tokens[-1].is_eos:
            return len(self.tokens) - 1
        return None


@dataclass(frozen=True, slots=True)
class ClaimPartition:
    """Ordered, disjoint claims covering every token index of a sample.

    ``has_eos`` records whether the final claim is the EOS claim (sole
    member: the EOS token). Scoring and annotation alignment skip that claim.
    """

    claims: tuple[tuple[int, ...], ...]
    has_eos: bool = True

    @property
    def n_scored_claims(self) -> int:
        return len(self.claims) - 1 if self.has_eos else len(self.claims)


@dataclass(frozen=True, slots=True)
class AnnotationSet:
    """Per-claim factuality labels from one annotator.

    Labels are -1 (non-factual) or +1 (factual), one per non-EOS claim, in
    claim order. ``partition_digest`` optionally pins the partition the
    labels were made against.
    """

    sample_id: str
    annotator: str
    labels: tuple[int, ...]
    partition_digest: str | None = None


@dataclass(frozen=True, slots=True)
class TokenScoreVector:
    """One uncertainty (or confidence) value per token of a sample."""

    sample_id: str
    scorer: str
    values: tuple[float, ...]
    higher_is_more_uncertain: bool


@dataclass(frozen=True, slots=True)
class ClaimScoreSet:
    """Aggregated claim-level scores, one per non-EOS claim."""

    sample_id: str
    scorer: str
    aggregator: AggregatorKind
    values: tuple[float, ...]
    higher_is_more_uncertain: bool


@dataclass(frozen=True, slots=True)
class ScorerConfig:
    """Knobs for the native scorers.

    ``entropy_top_k`` truncates the candidate distribution before the
    entropy sum; 5, 10 and 24 are the canonical settings.
    """

    entropy_top_k: int = CANDIDATES_PER_TOKEN

    def __post_init__(self) -> None:
        if not 1 <= self.entropy_top_k <= CANDIDATES_PER_TOKEN:
            raise ValueError(
                f"entropy_top_k must be in [1, {CANDIDATES_PER_TOKEN}], "
                f"got {self.entropy_top_k}"
            )


@dataclass(frozen=True, slots=True)
class ExternalScoreMeta:
    """Provenance for score files produced outside this package."""

    scorer_name: str
    higher_is_more_uncertain: bool
    hyperparams: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Violation:
    """One structural rule broken by a sample. ``token_index`` is None for
    sample-level problems."""

    code: str
    message: str
    token_index: int | None = None


def validate_sample(sample: Sample) -> list[Violation]:
    """Check every structural invariant; return all violations found.

    An empty list means the sample is well formed: 24 candidates per token
    sorted by logit, sampled_rank in range, contiguous character offsets
    whose non-EOS surfaces concatenate to generation_text, and a single EOS
    token in final position with an empty [len(text), len(text)) span.
    """
    out: list[Violation] = []
    text = sample.generation_text

    if sample.language not in LANGUAGES:
        out.append(Violation("language", f"unknown language {sample.language!r}"))

    eos_seen = False
    cursor = 0
    for i, tok in enumerate(sample.tokens):
        if len(tok.candidates) != CANDIDATES_PER_TOKEN:
            out.append(Violation(
                "candidate-count",
                f"token {i} has {len(tok.candidates)} candidates",
                i,
            ))
        else:
            logits = [lg for _, lg in tok.candidates]
            if any(a < b for a, b in zip(logits, logits[1:])):
                out.append(Violation(
                    "logit-order", f"token {i} candidates not sorted by logit", i))
        if not 0 <= tok.sampled_rank < CANDIDATES_PER_TOKEN:
            out.append(Violation(
                "rank-range",
                f"token {i} sampled_rank {tok.sampled_rank} outside "
                f"[0, {CANDIDATES_PER_TOKEN})",
                i,
            ))
        if tok.is_eos:
            if eos_seen:
                out.append(Violation("multiple-eos", f"second EOS at token {i}", i))
            eos_seen = True
            if i != len(sample.tokens) - 1:
                out.append(Violation(
                    "eos-not-last", f"EOS at token {i} is not final", i))
            if not (tok.char_start == tok.char_end == len(text)):
                out.append(Violation(
                    "eos-offset",
                    f"EOS span [{tok.char_start}, {tok.char_end}) is not "
                    f"[{len(text)}, {len(text)})",
                    i,
                ))
        else:
            if tok.char_start != cursor:
                out.append(Violation(
                    "contiguity",
                    f"token {i} starts at {tok.char_start}, expected {cursor}",
                    i,
                ))
            if tok.char_end < tok.char_start:
                out.append(Violation(
                    "contiguity", f"token {i} has negative extent", i))
            elif text[tok.char_start:tok.char_end] != tok.surface:
                out.append(Violation(
                    "surface-mismatch",
                    f"token {i} surface {tok.surface!r} != text slice "
                    f"{text[tok.char_start:tok.char_end]!r}",
                    i,
                ))
            cursor = tok.char_end

    if not eos_seen:
        out.append(Violation("missing-eos", "sample has no EOS token"))
    if cursor != len(text):
        out.append(Violation(
            "contiguity",
            f"non-EOS surfaces cover [0, {cursor}) but text has length {len(text)}",
        ))
    return out


# --- JSON serialization -----------------------------------------------------
#
# Plain dicts in a fixed key order; floats go through json's shortest
# round-trip repr so parse(serialize(x)) == x exactly.

def _require(row: Mapping[str, Any], key: str, kind: type | tuple[type, ...]):
    try:
        value = row[key]
    except KeyError:
        raise SchemaError(f"missing key {key!r}") from None
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SchemaError(f"key {key!r} has type {type(value).__name__}")
    return value


def sample_to_dict(sample: Sample) -> dict[str, Any]:
    return {
        "format": FORMAT_VERSION,
        "id": sample.id,
        "language": sample.language,
        "model": sample.model,
        "temperature": sample.temperature,
        "question": sample.question,
        "generation_text": sample.generation_text,
        "tokens": [
            {
                "surface": t.surface,
                "char_start": t.char_start,
                "char_end": t.char_end,
                "sampled_rank": t.sampled_rank,
                "candidates": [[tid, lg] for tid, lg in t.candidates],
                "is_eos": t.is_eos,
            }
            for t in sample.tokens
        ],
    }


def sample_from_dict(row: Mapping[str, Any]) -> Sample:
    fmt = _require(row, "format", str)
    if fmt != FORMAT_VERSION:
        raise SchemaError(f"unsupported format {fmt!r}")
    raw_tokens = _require(row, "tokens", list)
    tokens = []
    for j, t in enumerate(raw_tokens):
        if not isinstance(t, Mapping):
            raise SchemaError(f"token {j} is not an object")
        cands = _require(t, "candidates", list)
        try:
            candidates = tuple((int(tid), float(lg)) for tid, lg in cands)
        except (TypeError, ValueError):
            raise SchemaError(f"token {j} candidates malformed") from None
        tokens.append(TokenRecord(
            surface=_require(t, "surface", str),
            char_start=_require(t, "char_start", int),
            char_end=_require(t, "char_end", int),
            sampled_rank=_require(t, "sampled_rank", int),
            candidates=candidates,
            is_eos=bool(t.get("is_eos", False)),
        ))
    return Sample(
        id=_require(row, "id", str),
        language=_require(row, "language", str),
        model=_require(row, "model", str),
        temperature=_require(row, "temperature", float),
        question=_require(row, "question", str),
        generation_text=_require(row, "generation_text", str),
        tokens=tuple(tokens),
    )


def partition_to_dict(sample_id: str, partition: ClaimPartition) -> dict[str, Any]:
    return {
        "sample_id": sample_id,
        "claims": [list(c) for c in partition.claims],
        "has_eos": partition.has_eos,
    }


def partition_from_dict(row: Mapping[str, Any]) -> tuple[str, ClaimPartition]:
    claims_raw = _require(row, "claims", list)
    try:
        claims = tuple(tuple(int(i) for i in c) for c in claims_raw)
    except (TypeError, ValueError):
        raise SchemaError("claims malformed") from None
    return (
        _require(row, "sample_id", str),
        ClaimPartition(claims=claims, has_eos=_require(row, "has_eos", bool)),
    )


def annotations_to_dict(ann: AnnotationSet) -> dict[str, Any]:
    row: dict[str, Any] = {
        "sample_id": ann.sample_id,
        "annotator": ann.annotator,
        "labels": list(ann.labels),
    }
    if ann.partition_digest is not None:
        row["partition_digest"] = ann.partition_digest
    return row


def annotations_from_dict(row: Mapping[str, Any]) -> AnnotationSet:
    labels_raw = _require(row, "labels", list)
    labels = []
    for v in labels_raw:
        if not isinstance(v, int) or isinstance(v, bool) or v not in (-1, 1):
            raise SchemaError(f"label {v!r} is not -1 or +1")
        labels.append(v)
    digest = row.get("partition_digest")
    if digest is not None and not isinstance(digest, str):
        raise SchemaError("partition_digest is not a string")
    return AnnotationSet(
        sample_id=_require(row, "sample_id", str),
        annotator=_require(row, "annotator", str),
        labels=tuple(labels),
        partition_digest=digest,
    )


def token_scores_to_dict(vec: TokenScoreVector) -> dict[str, Any]:
    return {
        "sample_id": vec.sample_id,
        "scorer": vec.scorer,
        "values": list(vec.values),
        "higher_is_more_uncertain": vec.higher_is_more_uncertain,
    }


def token_scores_from_dict(row: Mapping[str, Any]) -> TokenScoreVector:
    values_raw = _require(row, "values", list)
    try:
        values = tuple(float(v) for v in values_raw)
    except (TypeError, ValueError):
        raise SchemaError("values malformed") from None
    return TokenScoreVector(
        sample_id=_require(row, "sample_id", str),
        scorer=_require(row, "scorer", str),
        values=values,
        higher_is_more_uncertain=_require(row, "higher_is_more_uncertain", bool),
    )


def claim_scores_to_dict(cs: ClaimScoreSet) -> dict[str, Any]:
    return {
        "sample_id": cs.sample_id,
        "scorer": cs.scorer,
        "aggregator": cs.aggregator.value,
        "values": list(cs.values),
        "higher_is_more_uncertain": cs.higher_is_more_uncertain,
    }


def claim_scores_from_dict(row: Mapping[str, Any]) -> ClaimScoreSet:
    values_raw = _require(row, "values", list)
    try:
        values = tuple(float(v) for v in values_raw)
    except (TypeError, ValueError):
        raise SchemaError("values malformed") from None
    agg_raw = _require(row, "aggregator", str)
    try:
        aggregator = AggregatorKind(agg_raw)
    except ValueError:
        raise SchemaError(f"unknown aggregator {agg_raw!r}") from None
    return ClaimScoreSet(
        sample_id=_require(row, "sample_id", str),
        scorer=_require(row, "scorer", str),
        aggregator=aggregator,
        values=values,
        higher_is_more_uncertain=_require(row, "higher_is_more_uncertain", bool),
    )


def partition_digest(partition: ClaimPartition) -> str:
    """Stable hex digest of a partition, for pinning annotations to it."""
    payload = json.dumps(
        [list(c) for c in partition.claims], separators=(",", ":")
    ).encode("ascii")
    return hashlib.sha256(payload).hexdigest()
