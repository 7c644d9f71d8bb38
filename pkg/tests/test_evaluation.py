"""Detection metrics against brute-force oracles, agreement, corpus stats."""
import random

import numpy as np
import pytest

from claimuq import (
    AnnotationSet,
    DegenerateLabelsError,
    agreement_from_confusion,
    cohen_kappa,
    evaluate_scores,
    hallucination_stats,
    pr_auc,
    pr_points,
    rec_at_prec,
    roc_auc,
    roc_points,
    tpr_at_fpr,
)
from claimuq._synth import make_sample


def _random_case(rng, n_max=60, round_to=1):
    """Scores with deliberate ties plus a mixed label vector."""
    while True:
        n = int(rng.integers(2, n_max))
        scores = np.round(rng.normal(size=n), round_to)
        labels = rng.choice([-1, 1], size=n)
        if 0 < (labels == -1).sum() < n:
            return scores, labels


def _auc_brute(scores, labels):
    pos = scores[labels == -1]
    neg = scores[labels == 1]
    wins = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def _ap_brute(scores, labels):
    thresholds = sorted(set(scores), reverse=True)
    n_pos = (labels == -1).sum()
    ap = 0.0
    prev_recall = 0.0
    for t in thresholds:
        sel = scores >= t
        tp = ((labels == -1) & sel).sum()
        fp = ((labels == 1) & sel).sum()
        recall = tp / n_pos
        ap += (recall - prev_recall) * (tp / (tp + fp))
        prev_recall = recall
    return ap


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([3, 2, 1, 0], [-1, -1, 1, 1], True) == 1.0
        assert roc_auc([0, 1, 2, 3], [-1, -1, 1, 1], True) == 0.0

    def test_all_tied_is_half(self):
        assert roc_auc([1.0] * 6, [-1, -1, -1, 1, 1, 1], True) == 0.5

    def test_orientation_flag_flips_ranking(self):
        s = [0.9, 0.8, 0.2, 0.1]
        y = [-1, -1, 1, 1]
        assert roc_auc(s, y, True) == 1.0
        assert roc_auc(s, y, False) == 0.0

    def test_matches_pairwise_brute_force(self):
        rng = np.random.default_rng(100)
        for _ in range(300):
            s, y = _random_case(rng)
            assert abs(roc_auc(s, y, True) - _auc_brute(s, y)) <= 1e-12

    def test_complement_symmetry_without_ties(self):
        rng = np.random.default_rng(101)
        for _ in range(100):
            n = int(rng.integers(2, 50))
            s = rng.permutation(n).astype(float)  # distinct scores
            y = rng.choice([-1, 1], size=n)
            if (y == -1).all() or (y == 1).all():
                continue
            assert roc_auc(s, y, True) + roc_auc(-s, y, True) == pytest.approx(1.0)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(102)
        s, y = _random_case(rng)
        base = roc_auc(s, y, True)
        assert roc_auc(np.exp(s), y, True) == pytest.approx(base, abs=1e-12)
        assert roc_auc(3.0 * s + 7.0, y, True) == pytest.approx(base, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateLabelsError):
            roc_auc([1, 2], [1, 1], True)
        with pytest.raises(DegenerateLabelsError):
            roc_auc([1, 2], [-1, -1], True)

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            roc_auc([1, 2], [0, 1], True)


class TestPrAuc:
    def test_perfect_separation(self):
        assert pr_auc([3, 2, 1, 0], [-1, -1, 1, 1], True) == 1.0

    def test_all_tied_equals_prevalence(self):
        assert pr_auc([1.0] * 4, [-1, 1, 1, 1], True) == pytest.approx(0.25)

    def test_random_scores_near_prevalence(self):
        rng = np.random.default_rng(103)
        n = 10000
        s = rng.normal(size=n)
        y = np.where(rng.random(n) < 0.3, -1, 1)
        assert pr_auc(s, y, True) == pytest.approx(0.3, abs=0.05)

    def test_matches_threshold_sweep_brute_force(self):
        rng = np.random.default_rng(104)
        for _ in range(300):
            s, y = _random_case(rng)
            assert abs(pr_auc(s, y, True) - _ap_brute(s, y)) <= 1e-12

    def test_curve_points_are_block_wise(self):
        pts = pr_points([0.9, 0.9, 0.1], [-1, 1, -1], True)
        # one point for the tied block at 0.9, one for 0.1
        assert pts == [(0.5, 0.5), (1.0, 2 / 3)]


class TestOperatingPoints:
    def test_perfect_scorer_hits_both_targets(self):
        s, y = [3, 2, 1, 0], [-1, -1, 1, 1]
        assert tpr_at_fpr(s, y, 0.1, True) == 1.0
        assert rec_at_prec(s, y, 0.8, True) == 1.0

    def test_all_tied_gives_zero_at_low_fpr(self):
        assert tpr_at_fpr([1.0] * 10, [-1] * 5 + [1] * 5, 0.1, True) == 0.0

    def test_unattainable_precision_gives_zero(self):
        # best achievable precision is 0.5 at every threshold
        s = [4, 3, 2, 1]
        y = [1, -1, 1, -1]
        assert rec_at_prec(s, y, 0.8, True) == 0.0

    def test_no_interpolation_between_thresholds(self):
        # FPR jumps 0 -> 0.5; at cap 0.4 only the first block qualifies
        s = [5, 4, 4, 1]
        y = [-1, 1, 1, -1]
        assert tpr_at_fpr(s, y, 0.4, True) == 0.5

    def test_monotone_in_cap_and_floor(self):
        rng = np.random.default_rng(105)
        s, y = _random_case(rng, n_max=200)
        caps = [0.05, 0.1, 0.2, 0.5, 0.9]
        tprs = [tpr_at_fpr(s, y, c, True) for c in caps]
        assert tprs == sorted(tprs)
        floors = [0.9, 0.8, 0.5, 0.2]
        recs = [rec_at_prec(s, y, f, True) for f in floors]
        assert recs == sorted(recs)

    def test_cap_bounds_validated(self):
        with pytest.raises(ValueError):
            tpr_at_fpr([1, 2], [-1, 1], 0.0, True)
        with pytest.raises(ValueError):
            rec_at_prec([1, 2], [-1, 1], 1.5, True)

    def test_roc_points_start_at_origin(self):
        pts = roc_points([3, 2, 1], [-1, 1, 1], True)
        assert pts[0] == (0.0, 0.0)
        assert pts[-1] == (1.0, 1.0)


class TestCohenKappa:
    def test_reference_confusion_matrices(self):
        """Four frozen 2x2 matrices with their published-precision kappas."""
        cases = [
            ([[10012, 1162], [2680, 20291]], 0.753),
            ([[192, 37], [22, 616]], 0.821),
            ([[196, 33], [17, 621]], 0.848),
            ([[201, 13], [12, 641]], 0.922),
        ]
        for matrix, want in cases:
            got = agreement_from_confusion(matrix).kappa
            assert got == pytest.approx(want, abs=1e-3)

    def test_perfect_agreement(self):
        r = cohen_kappa([-1, 1, -1, 1], [-1, 1, -1, 1])
        assert r.kappa == 1.0 and r.observed_agreement == 1.0

    def test_symmetry(self):
        rng = random.Random(7)
        a = [rng.choice([-1, 1]) for _ in range(200)]
        b = [rng.choice([-1, 1]) for _ in range(200)]
        assert cohen_kappa(a, b).kappa == pytest.approx(
            cohen_kappa(b, a).kappa, rel=1e-12)

    def test_chance_level_is_zero_kappa(self):
        # independent labels with matching marginals: kappa ~ 0 in the limit
        rng = random.Random(8)
        a = [rng.choice([-1, 1]) for _ in range(20000)]
        b = [rng.choice([-1, 1]) for _ in range(20000)]
        assert abs(cohen_kappa(a, b).kappa) < 0.03

    def test_confusion_layout_rows_a_cols_b(self):
        r = cohen_kappa([-1, -1, 1], [-1, 1, 1])
        assert r.confusion == ((1, 1), (0, 1))

    def test_observed_agreement_reported(self):
        r = cohen_kappa([-1, 1, 1, 1], [1, 1, 1, 1])
        assert r.observed_agreement == 0.75

    def test_degenerate_marginals_defined(self):
        assert agreement_from_confusion([[4, 0], [0, 0]]).kappa == 1.0

    def test_misaligned_rejected(self):
        with pytest.raises(ValueError):
            cohen_kappa([-1, 1], [-1])


class TestEvaluateScores:
    def test_report_fields_consistent(self):
        rng = np.random.default_rng(106)
        s, y = _random_case(rng, n_max=500)
        rep = evaluate_scores(s, y, True, scorer="x", aggregator="product",
                              with_curves=True)
        assert rep.n_pos == int((y == -1).sum())
        assert rep.n_neg == int((y == 1).sum())
        assert rep.roc_curve[0] == (0.0, 0.0)
        assert rep.pr_curve[-1][0] == 1.0  # recall reaches 1 at the last block
        assert 0.0 <= rep.roc_auc <= 1.0

    def test_orientation_consistency_between_metrics(self):
        """A confidence scorer evaluated as such must match the same scores
        negated and evaluated as uncertainty."""
        rng = np.random.default_rng(107)
        s, y = _random_case(rng)
        a = evaluate_scores(s, y, True)
        b = evaluate_scores(-s, y, False)
        assert a.roc_auc == pytest.approx(b.roc_auc, abs=1e-12)
        assert a.pr_auc == pytest.approx(b.pr_auc, abs=1e-12)


class TestHallucinationStats:
    def _pairs(self):
        rng = random.Random(9)
        out = []
        for i, (labels, lang, mdl) in enumerate([
            ((-1, 1, 1), "EN", "m1"),
            ((1, 1), "EN", "m1"),
            ((-1, -1), "FR", "m1"),
            ((1, 1, 1, 1), "FR", "m2"),
            ((-1, 1), "EN", "m2"),
        ]):
            sample = make_sample(rng, f"h{i}")
            sample = type(sample)(
                id=sample.id, language=lang, model=mdl,
                temperature=1.0, question="q",
                generation_text=sample.generation_text, tokens=sample.tokens)
            out.append((sample, AnnotationSet(sample.id, "a", labels)))
        return out

    def test_hand_counted_table(self):
        stats = hallucination_stats(self._pairs())
        overall = stats.cell()
        assert overall.n_samples == 5
        assert overall.n_hallucinated == 3
        assert overall.share_hallucinated == pytest.approx(0.6)
        # fractions: 1/3, 2/2, 1/2 -> mean 11/18
        assert overall.mean_nonfactual_fraction == pytest.approx(11 / 18)
        en = stats.cell("ALL", "EN")
        assert en.n_samples == 3 and en.n_hallucinated == 2
        m1 = stats.cell("m1", "ALL")
        assert m1.n_samples == 3 and m1.n_hallucinated == 2
        assert stats.cell("m2", "FR").n_hallucinated == 0

    def test_empty_annotations_rejected(self):
        rng = random.Random(10)
        s = make_sample(rng, "e")
        with pytest.raises(ValueError):
            hallucination_stats([(s, AnnotationSet("e", "a", ()))])
