import numpy as np
import pytest
from scipy.stats import mannwhitneyu

from fairrank.metrics import (
    auc,
    balanced_residuals,
    compute_report,
    impact_rank_ratio,
    irr_flagged,
    mean_difference,
    rmse,
)
from fairrank.projection import demotion_rank
from fairrank.ranking import (
    assign_ranks,
    auc_from_u,
    mann_whitney_u,
    sum_rank_partition,
)


def labels(pattern):
    return np.array(list(pattern))


class TestAuc:
    def test_interleaved_is_half(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0])
        assert auc(vals, labels("ABBA")) == 0.5

    def test_total_separation(self):
        vals = np.array([1.0, 2.0, 10.0, 11.0])
        assert auc(vals, labels("BBAA")) == 1.0

    def test_pairwise_example(self):
        # values [10, 20, 15, 5, 30], A = {10, 15}: A wins 2 of 6 pairs
        vals = np.array([10.0, 20.0, 15.0, 5.0, 30.0])
        assert auc(vals, labels("ABABB")) == pytest.approx(2 / 6)

    def test_flip_identity_tie_free(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 30))
            vals = rng.permutation(n).astype(float)
            prot = rng.choice(["A", "B"], size=n)
            if len(set(prot)) < 2:
                continue
            flipped = np.where(prot == "A", "B", "A")
            assert auc(vals, prot) + auc(vals, flipped) == pytest.approx(1.0)

    def test_two_paths_agree_with_ties(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(2, 40))
            vals = rng.integers(0, 6, size=n).astype(float)
            prot = rng.choice(["A", "B"], size=n)
            if len(set(prot)) < 2:
                continue
            n_a = int((prot == "A").sum())
            rv = assign_ranks(vals)
            via_ranks = auc_from_u(
                mann_whitney_u(sum_rank_partition(rv, prot, "A"), n_a), n_a, n - n_a
            )
            assert auc(vals, prot) == pytest.approx(via_ranks, abs=1e-12)

    def test_agrees_with_scipy(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(4, 40))
            vals = rng.integers(0, 8, size=n).astype(float)
            prot = rng.choice(["A", "B"], size=n)
            if len(set(prot)) < 2:
                continue
            a = vals[prot == "A"]
            b = vals[prot == "B"]
            u_stat = mannwhitneyu(a, b, alternative="two-sided").statistic
            assert auc(vals, prot) == pytest.approx(u_stat / (a.size * b.size))

    def test_demoted_semantics_match_demotion_rank(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(3, 20))
            vals = rng.normal(size=n)
            prot = rng.choice(["A", "B"], size=n)
            if len(set(prot)) < 2:
                continue
            demoted = rng.choice(n, size=int(rng.integers(0, n)), replace=False)
            n_a = int((prot == "A").sum())
            _, r_a = demotion_rank(vals, demoted, prot)
            expected = auc_from_u(mann_whitney_u(r_a, n_a), n_a, n - n_a)
            assert auc(vals, prot, demoted=demoted) == pytest.approx(expected, abs=1e-12)

    def test_empty_partition_rejected(self):
        with pytest.raises(ValueError):
            auc(np.array([1.0, 2.0]), labels("AA"))


class TestMeanDifference:
    def test_equal_means(self):
        assert mean_difference(np.array([1.0, 3.0, 2.0]), labels("AAB")) == 0.0

    def test_arithmetic(self):
        assert mean_difference(np.array([4.0, 1.0, 1.0]), labels("ABB")) == 3.0

    def test_shift_invariance(self):
        rng = np.random.default_rng(4)
        vals = rng.normal(size=20)
        prot = labels("AB" * 10)
        base = mean_difference(vals, prot)
        assert mean_difference(vals + 17.3, prot) == pytest.approx(base)


class TestBalancedResiduals:
    def test_perfect_predictions(self):
        y = np.array([1.0, 2.0, 3.0])
        assert balanced_residuals(y, y, labels("ABA")) == 0.0

    def test_uniform_offset_cancels(self):
        rng = np.random.default_rng(5)
        y = rng.normal(size=12)
        prot = labels("AB" * 6)
        assert balanced_residuals(y, y + 3.0, prot) == pytest.approx(0.0)

    def test_arithmetic(self):
        y = np.array([2.0, 2.0, 1.0])
        y_hat = np.array([1.0, 1.0, 1.0])
        assert balanced_residuals(y, y_hat, labels("AAB")) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            balanced_residuals(np.ones(3), np.ones(2), labels("AAB"))


class TestImpactRankRatio:
    def test_symmetric_partitions(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0])
        assert impact_rank_ratio(vals, labels("ABBA")) == pytest.approx(1.0)

    def test_bottom_heavy_a(self):
        # A at ranks {1, 2}, B at {3, 4, 5}: 1.5 / 4
        vals = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        assert impact_rank_ratio(vals, labels("AABBB")) == pytest.approx(0.375)

    def test_threshold_flag(self):
        assert irr_flagged(0.79)
        assert not irr_flagged(0.81)

    def test_reversal_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(2, 20)) * 2
            half = rng.permutation(n // 2).astype(float)
            # palindromic labels with mirrored values: mean ranks coincide
            vals = np.concatenate([half, (n - 1) - half[::-1]])
            prot_half = rng.choice(["A", "B"], size=n // 2)
            prot = np.concatenate([prot_half, prot_half[::-1]])
            if len(set(prot)) < 2:
                continue
            assert impact_rank_ratio(vals, prot) == pytest.approx(1.0)

    def test_demoted_changes_ranks(self):
        vals = np.array([1.0, 2.0, 3.0, 4.0])
        prot = labels("AABB")
        base = impact_rank_ratio(vals, prot)
        lifted = impact_rank_ratio(vals, prot, demoted=np.array([2, 3]))
        assert lifted > base


class TestRmse:
    def test_zero_for_exact(self):
        y = np.array([1.0, 2.0])
        assert rmse(y, y) == 0.0

    def test_arithmetic(self):
        assert rmse(np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(np.sqrt(12.5))

    def test_constant_residual(self):
        y = np.array([5.0, 6.0, 7.0])
        assert rmse(y, y - 2.0) == pytest.approx(2.0)


class TestReport:
    def test_fields_finite_and_consistent(self):
        rng = np.random.default_rng(7)
        y = rng.normal(size=30)
        y_hat = y + rng.normal(0, 0.1, size=30)
        prot = rng.choice(["A", "B"], size=30)
        prot[0], prot[1] = "A", "B"
        report = compute_report(y, y_hat, prot)
        d = report.as_dict()
        for key in ("auc", "md", "br", "irr", "rmse"):
            assert np.isfinite(d[key])
        assert report.n_a + report.n_b == 30
        assert 0.0 <= report.auc <= 1.0
        assert report.irr > 0
