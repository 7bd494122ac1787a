"""Sign-flip moments, conditions, and Monte Carlo estimator tests."""

import math

import numpy as np
import pytest

from normlens import (
    GaussianTokenModel,
    corollary_condition,
    corollary_implies_theorem_check,
    corollary_ratio,
    dot_mean,
    dot_variance,
    estimate_signflip,
    sweep_dimensions,
    tally_signs,
    theorem_condition,
    theorem_condition_sides,
)


def _random_model(rng, dim=None):
    d = dim or int(rng.integers(2, 9))
    return GaussianTokenModel(
        rng.normal(0, 2, d),
        rng.uniform(0.1, 3, d),
        rng.normal(0, 2, d),
        rng.uniform(0.1, 3, d),
    )


class TestMoments:
    def test_dot_mean_examples(self):
        m = GaussianTokenModel([1, 1], [1, 1], [1, 1], [1, 1])
        assert dot_mean(m) == 2.0
        ortho = GaussianTokenModel([1, 0], [1, 1], [0, 1], [1, 1])
        assert dot_mean(ortho) == 0.0

    def test_dot_variance_examples(self):
        centered = GaussianTokenModel([0, 0], [1, 1], [0, 0], [1, 1])
        assert dot_variance(centered) == 2.0
        deterministic = GaussianTokenModel([2, 3], [0, 0], [1, 1], [0, 0])
        assert dot_variance(deterministic) == 0.0

    def test_moments_match_monte_carlo(self):
        # Smaller companion of the acceptance check: 5 models, 2e5 samples.
        rng = np.random.default_rng(41)
        n = 200_000
        for trial in range(5):
            model = _random_model(rng)
            g = np.random.default_rng(1000 + trial)
            x = g.normal(model.mu_x, np.sqrt(model.sigma2_x), size=(n, model.dim))
            y = g.normal(model.mu_y, np.sqrt(model.sigma2_y), size=(n, model.dim))
            dots = np.einsum("ij,ij->i", x, y)
            se_mean = dots.std() / math.sqrt(n)
            assert abs(dot_mean(model) - dots.mean()) <= 4 * se_mean
            mc_var = dots.var()
            m4 = np.mean((dots - dots.mean()) ** 4)
            se_var = math.sqrt(max(m4 - mc_var**2, 0.0) / n)
            assert abs(dot_variance(model) - mc_var) <= 4 * se_var


class TestTheoremCondition:
    def test_zero_variance_with_nonzero_means(self):
        m = GaussianTokenModel([1, 2], [0, 0], [3, 4], [0, 0])
        assert theorem_condition(m) is True

    def test_zero_means(self):
        m = GaussianTokenModel([0, 0], [1, 1], [0, 0], [1, 1])
        assert theorem_condition(m) is False

    def test_shared_model_direct_evaluation(self):
        # D=256, mu=1.5, sigma2=1: lhs = 256*2.25 = 576,
        # rhs = 12*(16+1) + 5*(24+24+1.5+1.5) = 459.
        m = GaussianTokenModel.shared(1.5, 1.0, 256)
        lhs, rhs = theorem_condition_sides(m)
        assert lhs == pytest.approx(576.0, abs=1e-12)
        assert rhs == pytest.approx(459.0, abs=1e-12)
        assert theorem_condition(m) is True

    def test_negative_mean_alignment_uses_absolute_value(self):
        m = GaussianTokenModel.shared(-1.5, 1.0, 256)
        lhs, _ = theorem_condition_sides(m)
        assert lhs == pytest.approx(576.0, abs=1e-12)


class TestCorollaryCondition:
    def test_threshold_at_256(self):
        # 6 / 256**0.25 = 1.5 exactly
        assert corollary_ratio(256) == 1.5
        assert corollary_condition(1.5, 1.0, 1.5, 1.0, 256) is True
        assert corollary_condition(1.499, 1.0, 1.5, 1.0, 256) is False

    def test_small_dimension_threshold(self):
        # 6 / 16**0.25 = 3 > 1.5
        assert corollary_condition(1.5, 1.0, 1.5, 1.0, 16) is False

    def test_dimension_floor(self):
        assert corollary_condition(10.0, 1.0, 10.0, 1.0, 76) is False
        assert corollary_condition(10.0, 1.0, 10.0, 1.0, 77) is True

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            corollary_condition(1.0, 0.0, 1.0, 1.0, 100)


class TestCorollaryImpliesTheorem:
    def test_boundary_ratio_above_floor(self):
        for dim in range(77, 4097):
            assert corollary_implies_theorem_check(dim, corollary_ratio(dim))

    def test_below_floor_can_fail(self):
        # At D=50 the boundary ratio satisfies the premise but not the
        # separation inequality: lhs = 36*sqrt(50) ~ 254.6 < rhs ~ 279.
        assert corollary_implies_theorem_check(50, corollary_ratio(50)) is False

    def test_strong_ratio_at_256(self):
        assert corollary_implies_theorem_check(256, 1.5) is True

    def test_vacuous_when_premise_fails(self):
        assert corollary_implies_theorem_check(50, 0.1) is True


class TestEstimator:
    def test_no_centering_means_no_flip(self):
        # mu = 0: standardization is a positive diagonal rescaling.
        m = GaussianTokenModel.shared(0.0, 1.0, 16)
        est = estimate_signflip(m, 20_000, seed=5)
        assert est.p_hat == 0.0

    def test_deterministic_per_seed(self):
        m = GaussianTokenModel.shared(1.5, 1.0, 32)
        a = tally_signs(m, 70_000, seed=9)
        b = tally_signs(m, 70_000, seed=9)
        assert (a.n_flip, a.n_raw_nonpositive, a.n_norm_positive) == (
            b.n_flip,
            b.n_raw_nonpositive,
            b.n_norm_positive,
        )
        c = tally_signs(m, 70_000, seed=10)
        assert a.n_flip != c.n_flip

    def test_worker_count_does_not_change_counts(self, monkeypatch):
        m = GaussianTokenModel.shared(1.5, 1.0, 32)
        monkeypatch.setenv("NORMLENS_THREADS", "1")
        a = tally_signs(m, 150_000, seed=11)
        monkeypatch.setenv("NORMLENS_THREADS", "3")
        b = tally_signs(m, 150_000, seed=11)
        assert (a.n_flip, a.n_raw_nonpositive, a.n_norm_positive) == (
            b.n_flip,
            b.n_raw_nonpositive,
            b.n_norm_positive,
        )

    def test_normalized_dot_sign_is_symmetric(self):
        m = GaussianTokenModel.shared(1.5, 1.0, 64)
        tally = tally_signs(m, 100_000, seed=12)
        se = tally.std_err(tally.n_norm_positive)
        assert abs(tally.p_norm_positive - 0.5) <= 4 * se

    def test_std_err_formula(self):
        m = GaussianTokenModel.shared(1.5, 1.0, 16)
        est = estimate_signflip(m, 10_000, seed=13)
        assert est.std_err == pytest.approx(
            math.sqrt(est.p_hat * (1 - est.p_hat) / 10_000), abs=0
        )

    def test_rejects_zero_variance(self):
        m = GaussianTokenModel([1.0, 1.0], [1.0, 0.0], [1.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            estimate_signflip(m, 100, seed=0)

    def test_empirical_mode_runs(self):
        m = GaussianTokenModel.shared(1.5, 1.0, 64)
        tally = tally_signs(m, 20_000, seed=14, standardize="empirical")
        assert 0.0 <= tally.p_flip <= 1.0
        # Empirical per-token standardization also flips signs heavily in
        # the mean-dominated regime.
        assert tally.p_flip > 0.3

    def test_flip_bound_under_condition(self):
        m = GaussianTokenModel.shared(1.5, 1.0, 256)
        assert theorem_condition(m)
        tally = tally_signs(m, 100_000, seed=15)
        se = tally.std_err(tally.n_flip)
        assert tally.p_flip + 3 * se >= 0.40
        # Proof sub-bound: the raw dot product is almost never nonpositive.
        se_raw = tally.std_err(tally.n_raw_nonpositive)
        assert tally.p_raw_nonpositive <= 0.1 + 3 * se_raw


class TestSweep:
    def test_dimension_sweep_at_boundary_ratio(self):
        rows = sweep_dimensions([81, 256, 625, 1296], n_samples=100_000, seed=21)
        for row in rows:
            assert row["corollary_holds"] is True
            assert row["theorem_holds"] is True
            assert row["p_hat"] + 3 * row["std_err"] >= 0.40, row

    def test_fixed_ratio_rows(self):
        rows = sweep_dimensions([16, 256], n_samples=5_000, seed=22, ratio=1.5)
        assert rows[0]["corollary_holds"] is False  # threshold is 3 at D=16
        assert rows[1]["corollary_holds"] is True


class TestModelValidation:
    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            GaussianTokenModel([0, 0], [1, 1], [0, 0, 0], [1, 1, 1])

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            GaussianTokenModel([0, 0], [1, -1], [0, 0], [1, 1])
