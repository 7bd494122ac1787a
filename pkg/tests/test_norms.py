"""Normalization forward-pass tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normlens import NormConfig, gaussian_batch, normalize, token_l2_norms


def _random_batch(seed, n=3, l=4, d=6, mu=0.5):
    return gaussian_batch(n, l, np.full(d, mu), np.ones(d), seed=seed)


class TestUnitNorm:
    def test_direct_arithmetic(self):
        out = normalize([[[3.0, 4.0]]], NormConfig("unitnorm", k=1.0))
        expected = np.sqrt(2.0) * np.array([0.6, 0.8])
        np.testing.assert_allclose(out[0, 0], expected, atol=1e-9)
        np.testing.assert_allclose(out[0, 0], [0.84853, 1.13137], atol=1e-5)

    def test_output_norms_equal_scale(self):
        for k in (0.0, 1.0, 1.5, 2.5):
            x = _random_batch(21, d=8)
            out = normalize(x, NormConfig("unitnorm", k=k))
            np.testing.assert_allclose(token_l2_norms(out), 8.0 ** (k / 2), atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-6, 1e6))
    def test_positive_scale_invariance(self, alpha):
        x = _random_batch(22)
        cfg = NormConfig("unitnorm", k=1.5)
        np.testing.assert_allclose(normalize(alpha * x, cfg), normalize(x, cfg), atol=1e-12)

    def test_direction_preservation(self):
        x = _random_batch(23)
        out = normalize(x, NormConfig("unitnorm", k=1.5))
        # out = c * x with c > 0 per token
        c = token_l2_norms(out) / token_l2_norms(x)
        assert np.all(c > 0)
        np.testing.assert_allclose(out, c[:, :, np.newaxis] * x, atol=1e-12)

    def test_no_dot_product_sign_flip(self):
        rng = np.random.default_rng(24)
        x = rng.normal(size=(1, 10, 5))
        out = normalize(x, NormConfig("unitnorm", k=1.5))
        raw = np.einsum("id,jd->ij", x[0], x[0])
        nrm = np.einsum("id,jd->ij", out[0], out[0])
        assert np.all(np.sign(raw) * np.sign(nrm) >= 0)

    def test_rejects_affine(self):
        with pytest.raises(ValueError):
            NormConfig("unitnorm", gamma=np.ones(3))

    def test_zero_norm_guard_and_error(self):
        x = np.zeros((1, 1, 3))
        guarded = normalize(x, NormConfig("unitnorm", k=1.0))
        np.testing.assert_array_equal(guarded, 0.0)
        with pytest.raises(ValueError):
            normalize(x, NormConfig("unitnorm", k=1.0, zero_norm="error"))


class TestRmsNorm:
    def test_equals_unitnorm_k1(self):
        for seed in range(5):
            x = _random_batch(seed, d=7)
            a = normalize(x, NormConfig("rmsnorm"))
            b = normalize(x, NormConfig("unitnorm", k=1.0))
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_affine_applies(self):
        x = _random_batch(31, d=3)
        gamma = np.array([2.0, 0.5, 1.0])
        beta = np.array([0.0, 1.0, -1.0])
        base = normalize(x, NormConfig("rmsnorm"))
        out = normalize(x, NormConfig("rmsnorm", gamma=gamma, beta=beta))
        np.testing.assert_allclose(out, base * gamma + beta, atol=0)


class TestCenterScaleMethods:
    def test_layernorm_practice_two_feature_token(self):
        out = normalize([[[1.0, 3.0]]], NormConfig("layernorm_practice", eps=0.0))
        np.testing.assert_allclose(out[0, 0], [-1.0, 1.0], atol=1e-12)

    def test_layernorm_practice_postconditions(self):
        x = _random_batch(41, d=16)
        out = normalize(x, NormConfig("layernorm_practice", eps=0.0))
        np.testing.assert_allclose(out.mean(axis=2), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.var(axis=2), 1.0, atol=1e-9)

    def test_batchnorm_constant_feature_maps_to_zero(self):
        x = _random_batch(42, d=4)
        x[:, :, 2] = 3.25
        out = normalize(x, NormConfig("batchnorm", eps=1e-5))
        np.testing.assert_allclose(out[:, :, 2], 0.0, atol=1e-12)

    def test_batchnorm_axes(self):
        x = _random_batch(43, n=4, l=5, d=3)
        out = normalize(x, NormConfig("batchnorm", eps=0.0))
        flat = out.reshape(-1, 3)
        np.testing.assert_allclose(flat.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(flat.var(axis=0), 1.0, atol=1e-9)

    def test_layernorm_theory_axes(self):
        x = _random_batch(44, n=4, l=5, d=3)
        out = normalize(x, NormConfig("layernorm_theory", eps=0.0))
        for n in range(4):
            assert abs(out[n].mean()) < 1e-12
            assert abs(out[n].var() - 1.0) < 1e-9

    def test_identity_affine_is_bitwise_noop(self):
        x = _random_batch(45, d=4)
        for method in ("batchnorm", "layernorm_theory", "layernorm_practice", "rmsnorm"):
            plain = normalize(x, NormConfig(method))
            affine = normalize(x, NormConfig(method, gamma=np.ones(4), beta=np.zeros(4)))
            np.testing.assert_array_equal(plain, affine)

    def test_affine_shape_mismatch(self):
        x = _random_batch(46, d=4)
        with pytest.raises(ValueError):
            normalize(x, NormConfig("rmsnorm", gamma=np.ones(3)))

    def test_eps_regularizes(self):
        x = np.full((1, 1, 4), 7.0)
        out = normalize(x, NormConfig("layernorm_practice", eps=1e-5))
        np.testing.assert_array_equal(out, 0.0)


class TestTokenNorms:
    def test_examples(self):
        assert token_l2_norms([[[3.0, 4.0]]])[0, 0] == 5.0
        assert token_l2_norms([[[0.0, 0.0]]])[0, 0] == 0.0

    def test_squared_norm_identity(self):
        x = _random_batch(51)
        norms = token_l2_norms(x)
        dots = np.einsum("nld,nld->nl", x, x)
        np.testing.assert_allclose(norms**2, dots, atol=1e-12, rtol=1e-12)


class TestNormConfig:
    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            NormConfig("weightnorm")

    def test_rejects_negative_eps(self):
        with pytest.raises(ValueError):
            NormConfig("rmsnorm", eps=-1.0)

    def test_labels(self):
        assert NormConfig("unitnorm", k=1.5).label() == "unitnorm(k=1.5)"
        assert NormConfig("rmsnorm").label() == "rmsnorm"
