"""Jacobian of the unit-scaling normalization and gradient identities
through an affine layer.

For ``x~ = D**(k/2) * x / ||x||`` the Jacobian is

    J = D**(k/2) * (I / ||x|| - x x.T / ||x||**3),

symmetric with ``J x = 0``.  Feeding ``x = W v + b`` through the
normalization, the loss gradients are ``dL/dW = (J.T u) v.T``,
``dL/db = J.T u`` and ``dL/dv = W.T J.T u`` for upstream ``u = dL/dx~``.
Rescaling the parameters to ``(alpha W, alpha b)`` leaves the output
unchanged, scales the parameter gradients by ``1/alpha``, and leaves the
input gradient untouched; ``alpha_scaling_check`` verifies all three.
"""

import math
from dataclasses import dataclass

import numpy as np


def _as_vector(v, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class AffineLayer:
    """Affine map ``v -> w @ v + b``."""

    w: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("w must be a 2-D matrix")
        if b.shape != (w.shape[0],):
            raise ValueError(f"b must have shape ({w.shape[0]},), got {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.w @ v + self.b

    def scaled(self, alpha: float) -> "AffineLayer":
        return AffineLayer(alpha * self.w, alpha * self.b)


@dataclass(frozen=True)
class GradBundle:
    """Gradients of a scalar loss through normalization and affine layer."""

    grad_w: np.ndarray
    grad_b: np.ndarray
    grad_v: np.ndarray


def unit_scale_vector(x, k: float) -> np.ndarray:
    """``D**(k/2) * x / ||x||`` for a single vector."""
    x = _as_vector(x, "x")
    r = np.linalg.norm(x)
    if r == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return float(x.size) ** (k / 2.0) * x / r


def unitnorm_jacobian(x, k: float) -> np.ndarray:
    """Jacobian ``D**(k/2) * (I/||x|| - x x.T/||x||^3)`` at ``x``."""
    x = _as_vector(x, "x")
    r = np.linalg.norm(x)
    if r == 0.0:
        raise ValueError("Jacobian undefined at the zero vector")
    d = x.size
    return float(d) ** (k / 2.0) * (np.eye(d) / r - np.outer(x, x) / r**3)


def backward_affine_unitnorm(layer: AffineLayer, v, k: float, upstream) -> GradBundle:
    """Closed-form gradients of ``loss(unit_scale(W v + b))``.

    ``upstream`` is the loss gradient with respect to the normalized
    output.  Returns gradients to ``W``, ``b`` and ``v``.
    """
    v = _as_vector(v, "v")
    upstream = _as_vector(upstream, "upstream")
    if v.shape != (layer.w.shape[1],):
        raise ValueError(f"v must have shape ({layer.w.shape[1]},), got {v.shape}")
    if upstream.shape != (layer.w.shape[0],):
        raise ValueError(f"upstream must have shape ({layer.w.shape[0]},), got {upstream.shape}")
    x = layer.apply(v)
    jac = unitnorm_jacobian(x, k)
    ju = jac.T @ upstream
    return GradBundle(grad_w=np.outer(ju, v), grad_b=ju, grad_v=layer.w.T @ ju)


def _rel_err(got: np.ndarray, want: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(want))), 1e-300)
    return float(np.max(np.abs(got - want))) / scale


def alpha_scaling_check(
    layer: AffineLayer,
    v,
    k: float,
    alpha: float,
    upstream,
    out_tol: float = 1e-12,
    grad_rtol: float = 1e-10,
) -> tuple[bool, bool]:
    """Verify output invariance and gradient scaling under ``alpha > 0``.

    Returns ``(output_invariant, grads_scale_correctly)``: the normalized
    output of ``(alpha W, alpha b)`` matches the base output within
    ``out_tol`` (max-norm), the gradients to the scaled parameters equal
    ``1/alpha`` times the base ones, and the input gradient is unchanged
    (both within relative ``grad_rtol``).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    v = _as_vector(v, "v")
    upstream = _as_vector(upstream, "upstream")
    base_out = unit_scale_vector(layer.apply(v), k)
    scaled = layer.scaled(alpha)
    scaled_out = unit_scale_vector(scaled.apply(v), k)
    output_invariant = bool(np.max(np.abs(scaled_out - base_out)) < out_tol)

    base = backward_affine_unitnorm(layer, v, k, upstream)
    after = backward_affine_unitnorm(scaled, v, k, upstream)
    grads_ok = (
        _rel_err(after.grad_w, base.grad_w / alpha) < grad_rtol
        and _rel_err(after.grad_b, base.grad_b / alpha) < grad_rtol
        and _rel_err(after.grad_v, base.grad_v) < grad_rtol
    )
    return output_invariant, grads_ok


def finite_difference_gradient(f, theta: np.ndarray, h_scale: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``theta``.

    Step per coordinate is ``h_scale * max(1, |theta_i|)``.  ``theta`` may
    have any shape; the result matches it.
    """
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    it = np.nditer(theta, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        h = h_scale * max(1.0, abs(theta[idx]))
        up = theta.copy()
        up[idx] += h
        down = theta.copy()
        down[idx] -= h
        grad[idx] = (f(up) - f(down)) / (2.0 * h)
        it.iternext()
    return grad


def run_gradcheck(
    trials: int, seed: int, dim_in: int = 6, dim_out: int = 8, k: float = 1.5
) -> dict:
    """Randomized verification of the Jacobian and gradient identities.

    Per trial draws a layer, input, upstream gradient, and a log-uniform
    ``alpha in [1e-3, 1e3]``, then checks: Jacobian symmetry and
    ``J x = 0`` (1e-12), Jacobian and all three closed-form gradients
    against central finite differences (relative 1e-6, loss ``g.T x~``),
    output invariance under ``alpha`` (1e-12) and gradient scaling
    (relative 1e-10).  Returns a report dict with per-check max errors.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    max_err = {
        "jacobian_symmetry": 0.0,
        "jacobian_radial_null": 0.0,
        "jacobian_fd_rel": 0.0,
        "grad_w_fd_rel": 0.0,
        "grad_b_fd_rel": 0.0,
        "grad_v_fd_rel": 0.0,
    }
    alpha_output_ok = True
    alpha_grads_ok = True
    for _ in range(trials):
        while True:
            layer = AffineLayer(rng.normal(size=(dim_out, dim_in)), rng.normal(size=dim_out))
            v = rng.normal(size=dim_in)
            x = layer.apply(v)
            if np.linalg.norm(x) > 0.5:
                break
        upstream = rng.normal(size=dim_out)
        alpha = float(10.0 ** rng.uniform(-3, 3))

        jac = unitnorm_jacobian(x, k)
        max_err["jacobian_symmetry"] = max(
            max_err["jacobian_symmetry"], float(np.max(np.abs(jac - jac.T)))
        )
        max_err["jacobian_radial_null"] = max(
            max_err["jacobian_radial_null"], float(np.max(np.abs(jac @ x)))
        )
        fd_jac = np.column_stack(
            [
                finite_difference_gradient(
                    lambda xx, i=i: float(unit_scale_vector(xx, k)[i]), x
                )
                for i in range(dim_out)
            ]
        ).T
        max_err["jacobian_fd_rel"] = max(max_err["jacobian_fd_rel"], _rel_err(jac, fd_jac))

        bundle = backward_affine_unitnorm(layer, v, k, upstream)

        def loss_w(wflat):
            out = unit_scale_vector(wflat.reshape(dim_out, dim_in) @ v + layer.b, k)
            return float(upstream @ out)

        def loss_b(bb):
            return float(upstream @ unit_scale_vector(layer.w @ v + bb, k))

        def loss_v(vv):
            return float(upstream @ unit_scale_vector(layer.apply(vv), k))

        fd_w = finite_difference_gradient(loss_w, layer.w.ravel()).reshape(dim_out, dim_in)
        fd_b = finite_difference_gradient(loss_b, layer.b)
        fd_v = finite_difference_gradient(loss_v, v)
        max_err["grad_w_fd_rel"] = max(max_err["grad_w_fd_rel"], _rel_err(bundle.grad_w, fd_w))
        max_err["grad_b_fd_rel"] = max(max_err["grad_b_fd_rel"], _rel_err(bundle.grad_b, fd_b))
        max_err["grad_v_fd_rel"] = max(max_err["grad_v_fd_rel"], _rel_err(bundle.grad_v, fd_v))

        out_ok, grads_ok = alpha_scaling_check(layer, v, k, alpha, upstream)
        alpha_output_ok = alpha_output_ok and out_ok
        alpha_grads_ok = alpha_grads_ok and grads_ok

    checks = {
        "jacobian_symmetry": max_err["jacobian_symmetry"] < 1e-12,
        "jacobian_radial_null": max_err["jacobian_radial_null"] < 1e-12,
        "jacobian_fd_rel": max_err["jacobian_fd_rel"] < 1e-6,
        "grad_w_fd_rel": max_err["grad_w_fd_rel"] < 1e-6,
        "grad_b_fd_rel": max_err["grad_b_fd_rel"] < 1e-6,
        "grad_v_fd_rel": max_err["grad_v_fd_rel"] < 1e-6,
        "alpha_output_invariant": alpha_output_ok,
        "alpha_grads_scale": alpha_grads_ok,
    }
    return {
        "trials": trials,
        "seed": seed,
        "dim_in": dim_in,
        "dim_out": dim_out,
        "k": k,
        "max_errors": max_err,
        "checks": checks,
        "all_passed": all(checks.values()),
    }
