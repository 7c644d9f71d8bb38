"""Dataset assembly: loading, quality filters, composition, persistence.

A dataset directory holds ``samples.jsonl`` plus optionally
``annotations.jsonl`` (rows carry their annotator name). Filters drop
samples whose annotators disagree on any claim and samples that are
structurally unusable; every drop is recorded with a reason so counts are
conserved. Persistence writes artifacts in a fixed order and finishes with
a manifest of SHA-256 digests, so an interrupted run is recognizable by
the missing manifest.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .io import (
    RowError,
    read_annotations,
    read_samples,
    write_claim_scores,
    write_partitions,
    write_token_scores,
)
from .model import (
    AnnotationSet,
    AggregatorKind,
    ClaimPartition,
    ClaimScoreSet,
    Sample,
    TokenScoreVector,
    validate_sample,
)
from .evaluation import EvalReport

__all__ = [
    "LoadResult",
    "load_dataset",
    "FilterOutcome",
    "ANNOTATOR_MISMATCH",
    "MISSING_EOS",
    "SAMPLED_OUTSIDE_TOP24",
    "MALFORMED",
    "filter_agreement",
    "filter_wellformedness",
    "apply_filters",
    "dataset_composition",
    "persist_results",
    "MANIFEST_NAME",
    "INCOMPLETE_MARKER",
]

ANNOTATOR_MISMATCH = "ANNOTATOR_MISMATCH"
MISSING_EOS = "MISSING_EOS"
SAMPLED_OUTSIDE_TOP24 = "SAMPLED_OUTSIDE_TOP24"
MALFORMED = "MALFORMED"

MANIFEST_NAME = "manifest.json"
INCOMPLETE_MARKER = ".incomplete"


@dataclass(frozen=True, slots=True)
class LoadResult:
    """Samples plus annotations grouped by annotator, with row errors."""

    samples: tuple[Sample, ...]
    annotations: Mapping[str, Mapping[str, AnnotationSet]]
    errors: tuple[RowError, ...]
    logit_mode: str = "raw"

    def annotators(self) -> list[str]:
        return sorted(self.annotations)


def load_dataset(path: str | Path, logit_mode: str = "raw") -> LoadResult:
    """Load a dataset directory or a bare samples file.

    ``logit_mode`` records whether candidate logits are raw or already
    log-softmaxed; the native scorers are shift-invariant per token, so the
    mode is provenance metadata, not a transform.
    """
    if logit_mode not in ("raw", "log_softmax"):
        raise ValueError(f"unknown logit mode {logit_mode!r}")
    path = Path(path)
    samples_path = path / "samples.jsonl" if path.is_dir() else path
    samples, errors = read_samples(samples_path)

    by_annotator: dict[str, dict[str, AnnotationSet]] = {}
    ann_path = path / "annotations.jsonl" if path.is_dir() else None
    if ann_path is not None and ann_path.exists():
        anns, ann_errors = read_annotations(ann_path)
        errors.extend(ann_errors)
        for ann in anns:
            bucket = by_annotator.setdefault(ann.annotator, {})
            if ann.sample_id in bucket:
                errors.append(RowError(
                    str(ann_path), 0,
                    f"duplicate annotation for {ann.sample_id!r} "
                    f"by {ann.annotator!r}",
                ))
            bucket[ann.sample_id] = ann
    return LoadResult(
        samples=tuple(samples),
        annotations={k: dict(v) for k, v in by_annotator.items()},
        errors=tuple(errors),
        logit_mode=logit_mode,
    )


@dataclass(frozen=True, slots=True)
class FilterOutcome:
    """Which samples survived and why each other one was dropped."""

    kept: tuple[str, ...]
    dropped: Mapping[str, str]  # sample_id -> reason

    @property
    def drop_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for reason in self.dropped.values():
            counts[reason] = counts.get(reason, 0) + 1
        return dict(sorted(counts.items()))

    def to_dict(self) -> dict:
        return {
            "n_kept": len(self.kept),
            "n_dropped": len(self.dropped),
            "drop_counts": self.drop_counts,
            "dropped": dict(sorted(self.dropped.items())),
        }


def filter_agreement(a: AnnotationSet, b: AnnotationSet) -> str | None:
    """Reason to drop the sample, or None if both annotators fully agree."""
    if a.sample_id != b.sample_id:
        raise ValueError(f"annotation ids differ: {a.sample_id!r} vs {b.sample_id!r}")
    if len(a.labels) != len(b.labels) or a.labels != b.labels:
        return ANNOTATOR_MISMATCH
    return None


def filter_wellformedness(sample: Sample) -> str | None:
    """Reason to drop a structurally unusable sample, or None.

    Missing EOS wins over an out-of-candidates token when both apply,
    matching the order the conditions are checked during assembly.
    """
    violations = validate_sample(sample)
    codes = {v.code for v in violations}
    if "missing-eos" in codes:
        return MISSING_EOS
    if "rank-range" in codes:
        return SAMPLED_OUTSIDE_TOP24
    if codes:
        return MALFORMED
    return None


def apply_filters(
    samples: Sequence[Sample],
    annotations_a: Mapping[str, AnnotationSet] | None = None,
    annotations_b: Mapping[str, AnnotationSet] | None = None,
) -> FilterOutcome:
    """Run agreement (when both annotators given) then wellformedness.

    The two checks are independent per sample, so their order cannot
    change the outcome for different samples; when both would fire for one
    sample the agreement reason is recorded.
    """
    kept: list[str] = []
    dropped: dict[str, str] = {}
    for sample in samples:
        reason = None
        if annotations_a is not None and annotations_b is not None:
            ann_a = annotations_a.get(sample.id)
            ann_b = annotations_b.get(sample.id)
            if ann_a is None or ann_b is None:
                reason = ANNOTATOR_MISMATCH
            else:
                reason = filter_agreement(ann_a, ann_b)
        if reason is None:
            reason = filter_wellformedness(sample)
        if reason is None:
            kept.append(sample.id)
        else:
            dropped[sample.id] = reason
    return FilterOutcome(kept=tuple(kept), dropped=dropped)


def dataset_composition(samples: Sequence[Sample]) -> dict:
    """Share of samples per (language, model) cell, in percent.

    Cell percentages sum to 100 up to rounding; margins included.
    """
    if not samples:
        raise ValueError("no samples")
    counts: dict[tuple[str, str], int] = {}
    for s in samples:
        counts[(s.language, s.model)] = counts.get((s.language, s.model), 0) + 1
    total = len(samples)
    languages = sorted({lang for lang, _ in counts})
    models = sorted({m for _, m in counts})
    table = {
        lang: {
            m: 100.0 * counts.get((lang, m), 0) / total for m in models
        }
        for lang in languages
    }
    return {
        "n_samples": total,
        "languages": languages,
        "models": models,
        "percent": table,
        "language_percent": {
            lang: sum(row.values()) for lang, row in table.items()
        },
        "model_percent": {
            m: sum(table[lang][m] for lang in languages) for m in models
        },
    }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def _curve_file(path: Path, points: Iterable[tuple[float, float]]) -> None:
    # Column 0 carries the y coordinate (TPR / precision), column 1 the x.
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in points:
            fh.write(f"{y!r}\t{x!r}\n")


def persist_results(
    out_dir: str | Path,
    partitions: Sequence[tuple[str, ClaimPartition]] = (),
    token_scores: Sequence[TokenScoreVector] = (),
    claim_scores: Sequence[ClaimScoreSet] = (),
    reports: Sequence[EvalReport] = (),
    curve_aggregator: AggregatorKind = AggregatorKind.PRODUCT,
) -> dict:
    """Write all artifacts plus a manifest; return the manifest payload.

    Curve files are emitted only for reports produced under
    ``curve_aggregator`` (one ROC and one PR file per scorer). The manifest
    is written last; its absence next to the ``.incomplete`` marker means
    the directory holds a partial run.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / INCOMPLETE_MARKER
    marker.write_text("")

    written: list[Path] = []

    def note(path: Path) -> None:
        written.append(path)

    if partitions:
        p = out / "partitions.jsonl"
        write_partitions(p, sorted(partitions, key=lambda kv: kv[0]))
        note(p)
    for scorer in sorted({v.scorer for v in token_scores}):
        p = out / "scores" / f"{_slug(scorer)}.jsonl"
        write_token_scores(
            p,
            sorted(
                (v for v in token_scores if v.scorer == scorer),
                key=lambda v: v.sample_id,
            ),
        )
        note(p)
    for scorer, agg in sorted(
        {(c.scorer, c.aggregator) for c in claim_scores},
        key=lambda t: (t[0], t[1].value),
    ):
        p = out / "claim_scores" / f"{_slug(scorer)}__{agg.value}.jsonl"
        write_claim_scores(
            p,
            sorted(
                (c for c in claim_scores
                 if c.scorer == scorer and c.aggregator == agg),
                key=lambda c: c.sample_id,
            ),
        )
        note(p)
    for report in sorted(reports, key=lambda r: (r.scorer, r.aggregator)):
        base = f"{_slug(report.scorer)}__{report.aggregator}"
        p = out / "reports" / f"{base}.json"
        _write_json(p, report.to_dict())
        note(p)
        if report.aggregator == curve_aggregator.value and report.roc_curve:
            roc_path = out / "curves" / f"{_slug(report.scorer)}_roc.txt"
            _curve_file(roc_path, report.roc_curve)
            note(roc_path)
            pr_path = out / "curves" / f"{_slug(report.scorer)}_pr.txt"
            _curve_file(pr_path, report.pr_curve)
            note(pr_path)

    manifest = {
        "format": "claimuq-manifest/1",
        "artifacts": [
            {
                "path": str(p.relative_to(out)),
                "sha256": _sha256(p),
                "bytes": p.stat().st_size,
            }
            for p in sorted(written)
        ],
    }
    _write_json(out / MANIFEST_NAME, manifest)
    marker.unlink()
    return manifest


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "-" for ch in name)
