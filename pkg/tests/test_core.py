"""Substrate tests: Gaussian sampling, softmax, axis statistics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from normlens import axis_stats, gaussian_batch, softmax_row, validate_token_batch


class TestGaussianBatch:
    def test_degenerate_zero_mean_zero_variance(self):
        x = gaussian_batch(2, 3, np.zeros(4), np.zeros(4), seed=1)
        assert x.shape == (2, 3, 4)
        np.testing.assert_array_equal(x, 0.0)

    def test_zero_variance_returns_mean_exactly(self):
        x = gaussian_batch(1, 1, np.array([5.0, 5.0]), np.zeros(2), seed=9)
        np.testing.assert_array_equal(x[0, 0], [5.0, 5.0])

    def test_sample_mean_within_clt_bound(self):
        # 1e6 tokens, sigma=1: 4*sigma/sqrt(n) = 4e-3 per coordinate.
        x = gaussian_batch(1000, 1000, np.zeros(4), np.ones(4), seed=20240101)
        means = x.reshape(-1, 4).mean(axis=0)
        assert np.all(np.abs(means) < 4e-3), means

    def test_bit_identical_per_seed(self):
        a = gaussian_batch(4, 5, np.arange(3.0), np.ones(3), seed=77)
        b = gaussian_batch(4, 5, np.arange(3.0), np.ones(3), seed=77)
        np.testing.assert_array_equal(a, b)
        c = gaussian_batch(4, 5, np.arange(3.0), np.ones(3), seed=78)
        assert not np.array_equal(a, c)

    def test_thread_env_does_not_affect_stream(self, monkeypatch):
        a = gaussian_batch(2, 2, np.zeros(2), np.ones(2), seed=5)
        monkeypatch.setenv("NORMLENS_THREADS", "2")
        b = gaussian_batch(2, 2, np.zeros(2), np.ones(2), seed=5)
        np.testing.assert_array_equal(a, b)

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            gaussian_batch(1, 1, np.zeros(2), np.array([1.0, -0.1]), seed=0)

    @pytest.mark.parametrize("n,l", [(0, 1), (1, 0)])
    def test_rejects_zero_dims(self, n, l):
        with pytest.raises(ValueError):
            gaussian_batch(n, l, np.zeros(2), np.ones(2), seed=0)

    def test_matches_declared_distribution(self):
        mu = np.array([1.0, -2.0])
        sigma2 = np.array([4.0, 0.25])
        x = gaussian_batch(500, 500, mu, sigma2, seed=3).reshape(-1, 2)
        np.testing.assert_allclose(x.mean(axis=0), mu, atol=4 * 2.0 / 500)
        np.testing.assert_allclose(x.var(axis=0), sigma2, rtol=0.05)


class TestSoftmaxRow:
    def test_symmetry(self):
        np.testing.assert_allclose(softmax_row([0.0, 0.0, 0.0, 0.0]), 0.25, atol=1e-15)

    def test_large_logit_no_overflow(self):
        p = softmax_row([1000.0, 0.0])
        assert np.all(np.isfinite(p))
        np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-12)

    def test_direct_evaluation(self):
        # exp(x_i) / sum(exp(x_j)) computed independently
        import math

        v = [1.0, 2.0, 3.0]
        z = sum(math.exp(t) for t in v)
        expected = [math.exp(t) / z for t in v]
        np.testing.assert_allclose(softmax_row(v), expected, atol=1e-15)
        np.testing.assert_allclose(softmax_row(v), [0.09003, 0.24473, 0.66524], atol=1e-5)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            softmax_row([1.0, np.nan])

    @settings(max_examples=200, deadline=None)
    @given(
        arrays(
            np.float64,
            st.integers(1, 16),
            elements=st.floats(-350, 350, allow_nan=False),
        )
    )
    def test_probability_vector_for_all_finite_inputs(self, v):
        # Logit spreads beyond ~745 underflow to exact zeros in float64,
        # so strict positivity is asserted on the representable range.
        p = softmax_row(v)
        assert abs(p.sum() - 1.0) <= 1e-12
        assert np.all(p > 0)

    def test_sum_is_one_even_when_entries_underflow(self):
        p = softmax_row([-1000.0, 1000.0])
        assert p.sum() == 1.0
        assert p[1] == 1.0

    @settings(max_examples=200, deadline=None)
    @given(
        arrays(np.float64, st.integers(1, 16), elements=st.floats(-100, 100)),
        st.floats(-100, 100),
    )
    def test_translation_invariance(self, v, shift):
        np.testing.assert_allclose(softmax_row(v + shift), softmax_row(v), atol=1e-12)


def _two_pass_stats(x, ax):
    # Naive oracle: explicit mean, then explicit squared deviations.
    mean = x.mean(axis=ax, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=ax, keepdims=True)
    return mean, var


class TestAxisStats:
    def test_constant_batch(self):
        x = np.full((2, 3, 4), 2.5)
        for axes in (("batch",), ("feature",), ("batch", "sequence", "feature")):
            mean, var = axis_stats(x, axes)
            np.testing.assert_array_equal(mean, 2.5)
            np.testing.assert_array_equal(var, 0.0)

    def test_two_point_feature_variance(self):
        x = np.array([[[1.0, 3.0]]])
        mean, var = axis_stats(x, ("feature",))
        assert mean[0, 0, 0] == 2.0
        assert var[0, 0, 0] == 1.0

    def test_matches_two_pass_oracle_all_axis_subsets(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(3, 5, 7)) * 3 + 1
        name_to_ax = {"batch": 0, "sequence": 1, "feature": 2}
        subsets = [
            ("batch",),
            ("sequence",),
            ("feature",),
            ("batch", "sequence"),
            ("batch", "feature"),
            ("sequence", "feature"),
            ("batch", "sequence", "feature"),
        ]
        for axes in subsets:
            ax = tuple(name_to_ax[a] for a in axes)
            mean, var = axis_stats(x, axes)
            ref_mean, ref_var = _two_pass_stats(x, ax)
            np.testing.assert_allclose(mean, ref_mean, atol=1e-12)
            np.testing.assert_allclose(var, ref_var, atol=1e-12)
            assert mean.shape == ref_mean.shape

    def test_algebraic_identity(self):
        # var == E[x^2] - (E[x])^2
        rng = np.random.default_rng(12)
        x = rng.normal(size=(2, 4, 6))
        _, var = axis_stats(x, ("batch", "sequence", "feature"))
        ex2 = (x**2).mean()
        ex = x.mean()
        np.testing.assert_allclose(var.item(), ex2 - ex * ex, atol=1e-12)

    def test_standardized_batch(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(2, 4, 6))
        x = (x - x.mean()) / x.std()
        mean, var = axis_stats(x, ("batch", "sequence", "feature"))
        assert abs(mean.item()) < 1e-12
        assert abs(var.item() - 1.0) < 1e-12

    def test_rejects_empty_axes(self):
        with pytest.raises(ValueError):
            axis_stats(np.zeros((1, 1, 1)), ())

    def test_rejects_unknown_axis(self):
        with pytest.raises(ValueError):
            axis_stats(np.zeros((1, 1, 1)), ("channel",))


class TestValidateTokenBatch:
    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError):
            validate_token_batch(np.zeros((2, 2)))

    def test_rejects_nonfinite(self):
        x = np.zeros((1, 1, 2))
        x[0, 0, 0] = np.inf
        with pytest.raises(ValueError):
            validate_token_batch(x)

    def test_accepts_lists(self):
        out = validate_token_batch([[[1, 2]]])
        assert out.dtype == np.float64
        assert out.shape == (1, 1, 2)
