"""JSONL reading and writing for every row kind.

Readers collect malformed rows into error records instead of raising, so a
bad file reports every problem in one pass. Writers emit one compact JSON
object per line in a fixed key order; nothing here depends on wall-clock
time, so reruns are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, TypeVar

from .model import (
    AnnotationSet,
    ClaimPartition,
    ClaimScoreSet,
    Sample,
    SchemaError,
    TokenScoreVector,
    annotations_from_dict,
    annotations_to_dict,
    claim_scores_from_dict,
    claim_scores_to_dict,
    partition_from_dict,
    partition_to_dict,
    sample_from_dict,
    sample_to_dict,
    token_scores_from_dict,
    token_scores_to_dict,
)

__all__ = [
    "RowError",
    "DataError",
    "read_rows",
    "write_rows",
    "read_samples",
    "write_samples",
    "read_partitions",
    "write_partitions",
    "read_annotations",
    "write_annotations",
    "read_token_scores",
    "write_token_scores",
    "read_claim_scores",
    "write_claim_scores",
]

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class RowError:
    path: str
    row: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.row}: {self.message}"


class DataError(ValueError):
    """Raised by CLI paths when a file has unusable rows."""

    def __init__(self, errors: list[RowError]):
        self.errors = errors
        summary = "; ".join(str(e) for e in errors[:5])
        if len(errors) > 5:
            summary += f" (+{len(errors) - 5} more)"
        super().__init__(summary)


def read_rows(path: str | Path) -> Iterator[tuple[int, Any, str | None]]:
    """Yield (row_number, parsed_or_None, error_or_None) per non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line), None
            except json.JSONDecodeError as exc:
                yield lineno, None, f"invalid JSON: {exc}"


def _read_typed(
    path: str | Path, parse: Callable[[Any], T]
) -> tuple[list[T], list[RowError]]:
    items: list[T] = []
    errors: list[RowError] = []
    for lineno, row, err in read_rows(path):
        if err is not None:
            errors.append(RowError(str(path), lineno, err))
            continue
        try:
            items.append(parse(row))
        except SchemaError as exc:
            errors.append(RowError(str(path), lineno, str(exc)))
    return items, errors


def write_rows(path: str | Path, rows: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def read_samples(path: str | Path) -> tuple[list[Sample], list[RowError]]:
    return _read_typed(path, sample_from_dict)


def write_samples(path: str | Path, samples: Iterable[Sample]) -> None:
    write_rows(path, (sample_to_dict(s) for s in samples))


def read_partitions(
    path: str | Path,
) -> tuple[dict[str, ClaimPartition], list[RowError]]:
    pairs, errors = _read_typed(path, partition_from_dict)
    out: dict[str, ClaimPartition] = {}
    for sid, part in pairs:
        if sid in out:
            errors.append(RowError(str(path), 0, f"duplicate partition for {sid!r}"))
        out[sid] = part
    return out, errors


def write_partitions(
    path: str | Path, items: Iterable[tuple[str, ClaimPartition]]
) -> None:
    write_rows(path, (partition_to_dict(sid, p) for sid, p in items))


def read_annotations(
    path: str | Path,
) -> tuple[list[AnnotationSet], list[RowError]]:
    return _read_typed(path, annotations_from_dict)


def write_annotations(path: str | Path, items: Iterable[AnnotationSet]) -> None:
    write_rows(path, (annotations_to_dict(a) for a in items))


def read_token_scores(
    path: str | Path,
) -> tuple[list[TokenScoreVector], list[RowError]]:
    return _read_typed(path, token_scores_from_dict)


def write_token_scores(path: str | Path, items: Iterable[TokenScoreVector]) -> None:
    write_rows(path, (token_scores_to_dict(v) for v in items))


def read_claim_scores(
    path: str | Path,
) -> tuple[list[ClaimScoreSet], list[RowError]]:
    return _read_typed(path, claim_scores_from_dict)


def write_claim_scores(path: str | Path, items: Iterable[ClaimScoreSet]) -> None:
    write_rows(path, (claim_scores_to_dict(c) for c in items))
