"""Detection metrics over claim scores and annotator agreement.

The positive class is always the non-factual label (-1). Confidence
oriented scores are negated internally before ranking so that every metric
reads "how well does this scorer rank non-factual claims on top".

ROC-AUC uses average ranks (ties share the mean rank), which equals the
probability that a random positive outranks a random negative with ties
counted half. PR-AUC is average precision computed over distinct-score
blocks with no interpolation. Operating points are conservative: the best
achieved point satisfying the constraint, never an interpolated one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import AnnotationSet, Sample

__all__ = [
    "DegenerateLabelsError",
    "roc_auc",
    "pr_auc",
    "roc_points",
    "pr_points",
    "tpr_at_fpr",
    "rec_at_prec",
    "EvalReport",
    "evaluate_scores",
    "AgreementReport",
    "cohen_kappa",
    "agreement_from_confusion",
    "HallucinationStats",
    "hallucination_stats",
]

POSITIVE_LABEL = -1


class DegenerateLabelsError(ValueError):
    """Metrics over a single class are undefined."""


def _oriented(scores: Sequence[float], higher_is_more_uncertain: bool) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("scores must be one-dimensional")
    return s if higher_is_more_uncertain else -s


def _positives(labels: Sequence[int]) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    pos = y == POSITIVE_LABEL
    if pos.all() or not pos.any():
        raise DegenerateLabelsError("need at least one claim of each class")
    return pos


def _average_ranks(s: np.ndarray) -> np.ndarray:
    """1-based ranks, ties assigned the mean rank of their group."""
    n = s.shape[0]
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    starts = np.r_[0, np.flatnonzero(ss[1:] != ss[:-1]) + 1]
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def roc_auc(
    scores: Sequence[float],
    labels: Sequence[int],
    higher_is_more_uncertain: bool = True,
) -> float:
    """Rank-sum ROC-AUC with tie correction."""
    s = _oriented(scores, higher_is_more_uncertain)
    pos = _positives(labels)
    if s.shape[0] != pos.shape[0]:
        raise ValueError("scores and labels differ in length")
    n_pos = int(pos.sum())
    n_neg = pos.shape[0] - n_pos
    ranks = _average_ranks(s)
    return float(
        (ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    )


def _sweep(
    scores: Sequence[float], labels: Sequence[int], higher_is_more_uncertain: bool
) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Cumulative (tp, fp) at each distinct score threshold, descending."""
    s = _oriented(scores, higher_is_more_uncertain)
    pos = _positives(labels)
    if s.shape[0] != pos.shape[0]:
        raise ValueError("scores and labels differ in length")
    order = np.argsort(-s, kind="mergesort")
    ss = s[order]
    y = pos[order]
    block_ends = np.r_[np.flatnonzero(ss[1:] != ss[:-1]), s.shape[0] - 1]
    tp = np.cumsum(y)[block_ends].astype(np.float64)
    fp = (block_ends + 1) - tp
    return tp, fp, int(pos.sum()), int((~pos).sum())


def roc_points(
    scores: Sequence[float],
    labels: Sequence[int],
    higher_is_more_uncertain: bool = True,
) -> list[tuple[float, float]]:
    """(fpr, tpr) per threshold block, starting at the origin."""
    tp, fp, n_pos, n_neg = _sweep(scores, labels, higher_is_more_uncertain)
    pts = [(0.0, 0.0)]
    pts.extend((float(f / n_neg), float(t / n_pos)) for t, f in zip(tp, fp))
    return pts


def pr_points(
    scores: Sequence[float],
    labels: Sequence[int],
    higher_is_more_uncertain: bool = True,
) -> list[tuple[float, float]]:
    """(recall, precision) per threshold block."""
    tp, fp, n_pos, _ = _sweep(scores, labels, higher_is_more_uncertain)
    return [
        (float(t / n_pos), float(t / (t + f))) for t, f in zip(tp, fp)
    ]


def pr_auc(
    scores: Sequence[float],
    labels: Sequence[int],
    higher_is_more_uncertain: bool = True,
) -> float:
    """Average precision: sum of precision weighted by recall increments."""
    pts = pr_points(scores, labels, higher_is_more_uncertain)
    ap = 0.0
    prev_recall = 0.0
    for recall, precision in pts:
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return float(ap)


def tpr_at_fpr(
    scores: Sequence[float],
    labels: Sequence[int],
    fpr_cap: float,
    higher_is_more_uncertain: bool = True,
) -> float:
    """Highest TPR over thresholds whose FPR stays within the cap."""
    if not 0.0 < fpr_cap < 1.0:
        raise ValueError(f"fpr_cap must be in (0, 1), got {fpr_cap}")
    best = 0.0
    for fpr, tpr in roc_points(scores, labels, higher_is_more_uncertain):
        if fpr <= fpr_cap and tpr > best:
            best = tpr
    return best


def rec_at_prec(
    scores: Sequence[float],
    labels: Sequence[int],
    prec_floor: float,
    higher_is_more_uncertain: bool = True,
) -> float:
    """Highest recall over thresholds whose precision meets the floor."""
    if not 0.0 < prec_floor <= 1.0:
        raise ValueError(f"prec_floor must be in (0, 1], got {prec_floor}")
    best = 0.0
    for recall, precision in pr_points(scores, labels, higher_is_more_uncertain):
        if precision >= prec_floor and recall > best:
            best = recall
    return best


@dataclass(frozen=True, slots=True)
class EvalReport:
    scorer: str
    aggregator: str
    roc_auc: float
    pr_auc: float
    tpr_at_fpr_cap: float
    rec_at_prec_floor: float
    fpr_cap: float
    prec_floor: float
    n_pos: int
    n_neg: int
    roc_curve: tuple[tuple[float, float], ...] = ()
    pr_curve: tuple[tuple[float, float], ...] = ()
    breakdowns: Mapping[str, Mapping[str, "EvalReport | str"]] = field(
        default_factory=dict
    )

    def to_dict(self) -> dict:
        d = {
            "scorer": self.scorer,
            "aggregator": self.aggregator,
            "roc_auc": self.roc_auc,
            "pr_auc": self.pr_auc,
            "tpr_at_fpr_cap": self.tpr_at_fpr_cap,
            "rec_at_prec_floor": self.rec_at_prec_floor,
            "fpr_cap": self.fpr_cap,
            "prec_floor": self.prec_floor,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
        }
        if self.breakdowns:
            d["breakdowns"] = {
                key: {
                    g: (r if isinstance(r, str) else r.to_dict())
                    for g, r in sorted(groups.items())
                }
                for key, groups in sorted(self.breakdowns.items())
            }
        return d


def evaluate_scores(
    scores: Sequence[float],
    labels: Sequence[int],
    higher_is_more_uncertain: bool,
    *,
    scorer: str = "",
    aggregator: str = "",
    fpr_cap: float = 0.1,
    prec_floor: float = 0.8,
    with_curves: bool = False,
) -> EvalReport:
    """All detection metrics for one pooled score/label set."""
    pos = _positives(labels)
    return EvalReport(
        scorer=scorer,
        aggregator=aggregator,
        roc_auc=roc_auc(scores, labels, higher_is_more_uncertain),
        pr_auc=pr_auc(scores, labels, higher_is_more_uncertain),
        tpr_at_fpr_cap=tpr_at_fpr(scores, labels, fpr_cap, higher_is_more_uncertain),
        rec_at_prec_floor=rec_at_prec(
            scores, labels, prec_floor, higher_is_more_uncertain),
        fpr_cap=fpr_cap,
        prec_floor=prec_floor,
        n_pos=int(pos.sum()),
        n_neg=int((~pos).sum()),
        roc_curve=tuple(roc_points(scores, labels, higher_is_more_uncertain))
        if with_curves else (),
        pr_curve=tuple(pr_points(scores, labels, higher_is_more_uncertain))
        if with_curves else (),
    )


# --- Annotator agreement -----------------------------------------------------

@dataclass(frozen=True, slots=True)
class AgreementReport:
    """Chance-corrected agreement between two label sequences.

    ``confusion`` rows follow annotator a, columns annotator b, label order
    (-1, +1).
    """

    kappa: float
    observed_agreement: float
    expected_agreement: float
    confusion: tuple[tuple[int, int], tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed_agreement,
            "expected_agreement": self.expected_agreement,
            "confusion": [list(r) for r in self.confusion],
        }


def agreement_from_confusion(
    confusion: Sequence[Sequence[float]],
) -> AgreementReport:
    """Cohen's kappa from a 2x2 confusion matrix.

    kappa = (p_o - p_e) / (1 - p_e) with p_e the product of the marginals.
    If chance agreement is exactly 1 the statistic degenerates; we define
    it as 1.0 under perfect observed agreement and 0.0 otherwise.
    """
    m = np.asarray(confusion, dtype=np.float64)
    if m.shape != (2, 2) or np.any(m < 0):
        raise ValueError("confusion must be a nonnegative 2x2 matrix")
    n = m.sum()
    if n == 0:
        raise ValueError("confusion matrix is empty")
    p_o = float(np.trace(m) / n)
    p_e = float((m.sum(axis=1) * m.sum(axis=0)).sum() / (n * n))
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    counts = tuple(tuple(int(v) for v in row) for row in np.asarray(confusion))
    return AgreementReport(
        kappa=float(kappa),
        observed_agreement=p_o,
        expected_agreement=p_e,
        confusion=counts,  # type: ignore[arg-type]
    )


def cohen_kappa(a: Sequence[int], b: Sequence[int]) -> AgreementReport:
    """Agreement between two aligned label sequences over {-1, +1}."""
    ya = np.asarray(a)
    yb = np.asarray(b)
    if ya.shape != yb.shape or ya.ndim != 1 or ya.shape[0] == 0:
        raise ValueError("label sequences must be aligned and non-empty")
    for y in (ya, yb):
        if not np.isin(y, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")
    order = (POSITIVE_LABEL, -POSITIVE_LABEL)
    m = [[int(((ya == r) & (yb == c)).sum()) for c in order] for r in order]
    return agreement_from_confusion(m)


# --- Corpus-level hallucination statistics -----------------------------------

@dataclass(frozen=True, slots=True)
class HallucinationStats:
    """Counts per (model, language) cell plus ALL margins.

    ``share_hallucinated`` is the fraction of samples containing at least
    one non-factual claim; ``mean_nonfactual_fraction`` averages, over those
    samples only, the per-sample share of non-factual claims.
    """

    cells: Mapping[tuple[str, str], "HallucinationCell"]

    def cell(self, model: str = "ALL", language: str = "ALL") -> "HallucinationCell":
        return self.cells[(model, language)]

    def to_dict(self) -> dict:
        return {
            f"{model}/{language}": cell.to_dict()
            for (model, language), cell in sorted(self.cells.items())
        }


@dataclass(frozen=True, slots=True)
class HallucinationCell:
    n_samples: int
    n_hallucinated: int
    share_hallucinated: float
    mean_nonfactual_fraction: float

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_hallucinated": self.n_hallucinated,
            "share_hallucinated": self.share_hallucinated,
            "mean_nonfactual_fraction": self.mean_nonfactual_fraction,
        }


def hallucination_stats(
    pairs: Iterable[tuple[Sample, AnnotationSet]],
) -> HallucinationStats:
    """Tabulate hallucination frequency by model and language."""
    per_cell: dict[tuple[str, str], list[tuple[bool, float]]] = {}
    for sample, ann in pairs:
        if not ann.labels:
            raise ValueError(f"sample {sample.id}: empty annotation set")
        neg = sum(1 for lab in ann.labels if lab == POSITIVE_LABEL)
        entry = (neg > 0, neg / len(ann.labels))
        for key in (
            (sample.model, sample.language),
            (sample.model, "ALL"),
            ("ALL", sample.language),
            ("ALL", "ALL"),
        ):
            per_cell.setdefault(key, []).append(entry)
    cells = {}
    for key, entries in per_cell.items():
        hall = [frac for has, frac in entries if has]
        cells[key] = HallucinationCell(
            n_samples=len(entries),
            n_hallucinated=len(hall),
            share_hallucinated=len(hall) / len(entries),
            mean_nonfactual_fraction=sum(hall) / len(hall) if hall else 0.0,
        )
    return HallucinationStats(cells=cells)
