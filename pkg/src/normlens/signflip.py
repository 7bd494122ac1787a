"""Dot-product sign-flip analysis for independent Gaussian token pairs.

Center-and-scale standardization ``x -> (x - mu) / sigma`` can flip the
sign of a dot product ``x.T y``.  This module provides the closed-form
moments of ``x.T y``, the mean-variance separation condition under which
the flip probability is at least 0.40, the shared-mean specialization of
that condition (``mu/sigma >= 6 / D**0.25`` per side, ``D >= 77``), and a
seeded Monte Carlo estimator of the flip probability itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._backend import map_ordered

#: Fixed Monte Carlo chunk size; results are independent of worker count.
CHUNK_SAMPLES = 65536

#: Dimension floor of the shared-mean condition.
MIN_SHARED_DIM = 77


def _as_vec(v, name):
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    return arr


@dataclass(frozen=True)
class GaussianTokenModel:
    """Two independent diagonal-Gaussian token distributions over R^D."""

    mu_x: np.ndarray
    sigma2_x: np.ndarray
    mu_y: np.ndarray
    sigma2_y: np.ndarray

    def __post_init__(self):
        for name in ("mu_x", "sigma2_x", "mu_y", "sigma2_y"):
            object.__setattr__(self, name, _as_vec(getattr(self, name), name))
        d = self.mu_x.size
        for name in ("sigma2_x", "mu_y", "sigma2_y"):
            if getattr(self, name).size != d:
                raise ValueError("all model vectors must share one length")
        if np.any(self.sigma2_x < 0) or np.any(self.sigma2_y < 0):
            raise ValueError("variances must be entrywise >= 0")

    @property
    def dim(self) -> int:
        return self.mu_x.size

    @classmethod
    def shared(cls, mu: float, sigma2: float, dim: int) -> "GaussianTokenModel":
        """Model with constant mean ``mu`` and variance ``sigma2`` on both sides."""
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        m = np.full(dim, float(mu))
        s = np.full(dim, float(sigma2))
        return cls(m, s, m.copy(), s.copy())


def dot_mean(model: GaussianTokenModel) -> float:
    """Expected value of ``x.T y``: ``mu_x.T mu_y``."""
    return float(model.mu_x @ model.mu_y)


def dot_variance(model: GaussianTokenModel) -> float:
    """Variance of ``x.T y``.

    Equals ``sigma2_x.T sigma2_y + sigma2_y.T mu_x**2 + sigma2_x.T mu_y**2``
    for independent diagonal Gaussians.
    """
    return float(
        model.sigma2_x @ model.sigma2_y
        + model.sigma2_y @ (model.mu_x**2)
        + model.sigma2_x @ (model.mu_y**2)
    )


def theorem_condition_sides(model: GaussianTokenModel) -> tuple[float, float]:
    """Left and right side of the mean-variance separation inequality."""
    sx = np.sqrt(model.sigma2_x)
    sy = np.sqrt(model.sigma2_y)
    lhs = abs(float(model.mu_x @ model.mu_y))
    rhs = 12.0 * (
        math.sqrt(float(model.sigma2_x @ model.sigma2_y)) + float(np.max(sx * sy))
    ) + 5.0 * (
        math.sqrt(float(model.sigma2_y @ (model.mu_x**2)))
        + math.sqrt(float(model.sigma2_x @ (model.mu_y**2)))
        + float(np.max(sy * np.abs(model.mu_x)))
        + float(np.max(sx * np.abs(model.mu_y)))
    )
    return lhs, rhs


def theorem_condition(model: GaussianTokenModel) -> bool:
    """Whether the model separates means from noise strongly enough that
    standardization flips the dot-product sign with probability >= 0.40.

    Evaluates ``|mu_x.T mu_y| >= 12*(sqrt(s2x.T s2y) + max(sx*sy))
    + 5*(sqrt(s2y.T mux^2) + sqrt(s2x.T muy^2) + max(sy*|mux|) +
    max(sx*|muy|))`` exactly, with no tolerance slack.
    """
    lhs, rhs = theorem_condition_sides(model)
    return lhs >= rhs


def corollary_condition(mu_x: float, sigma_x: float, mu_y: float, sigma_y: float, dim: int) -> bool:
    """Shared-mean specialization of the separation condition.

    True iff ``mu_x/sigma_x >= 6/dim**0.25`` and ``mu_y/sigma_y >=
    6/dim**0.25`` and ``dim >= 77``.  The dimension floor comes from the
    inequality ``D**0.5/3 + 5*(D**0.75 + D**0.25)/3 <= 2*D/3`` which first
    holds at ``D = 77``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if sigma_x <= 0 or sigma_y <= 0:
        raise ValueError("sigma_x and sigma_y must be > 0")
    threshold = 6.0 / float(dim) ** 0.25
    return (mu_x / sigma_x >= threshold) and (mu_y / sigma_y >= threshold) and dim >= MIN_SHARED_DIM


def corollary_implies_theorem_check(dim: int, ratio: float) -> bool:
    """Check the implication "ratio condition => separation condition" at
    one ``(dim, ratio)`` instance.

    Builds the shared model with ``sigma = 1`` and ``mu = ratio`` and
    returns the truth value of ``(ratio >= 6/dim**0.25) implies
    theorem_condition``.  Only the ratio inequality feeds the premise; the
    ``dim >= 77`` floor is exactly what sweeping this check across
    dimensions probes.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if ratio <= 0:
        raise ValueError(f"ratio must be > 0, got {ratio}")
    premise = ratio >= 6.0 / float(dim) ** 0.25
    if not premise:
        return True
    return theorem_condition(GaussianTokenModel.shared(ratio, 1.0, dim))


@dataclass(frozen=True)
class SignTally:
    """Raw Monte Carlo sign counts over ``n_samples`` pairs."""

    n_samples: int
    n_flip: int
    n_raw_nonpositive: int
    n_norm_positive: int
    seed: int
    standardize: str

    def prob(self, count: int) -> float:
        return count / self.n_samples

    def std_err(self, count: int) -> float:
        p = self.prob(count)
        return math.sqrt(p * (1.0 - p) / self.n_samples)

    @property
    def p_flip(self) -> float:
        return self.prob(self.n_flip)

    @property
    def p_raw_nonpositive(self) -> float:
        return self.prob(self.n_raw_nonpositive)

    @property
    def p_norm_positive(self) -> float:
        return self.prob(self.n_norm_positive)


@dataclass(frozen=True)
class SignFlipEstimate:
    """Estimated probability that standardization flips the dot-product sign."""

    p_hat: float
    n_samples: int
    std_err: float
    seed: int


def _chunk_plan(n_samples: int, seed: int):
    n_chunks = (n_samples + CHUNK_SAMPLES - 1) // CHUNK_SAMPLES
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [CHUNK_SAMPLES] * (n_chunks - 1) + [n_samples - CHUNK_SAMPLES * (n_chunks - 1)]
    return list(zip(children, sizes))


def tally_signs(
    model: GaussianTokenModel, n_samples: int, seed: int, standardize: str = "model"
) -> SignTally:
    """Draw ``n_samples`` independent pairs and tally sign events.

    Per pair: the raw vectors are ``x = mu + sigma * z`` for standard
    normal ``z``, and the standardized vectors are the ``z`` draws
    themselves when ``standardize="model"`` (exact per-coordinate
    standardization with the true parameters).  ``standardize="empirical"``
    instead recenters and rescales each sampled vector by its own
    per-token mean and standard deviation.  Exact-zero dot products count
    as "no flip".  Sampling is chunked with a fixed chunk size and
    per-chunk derived seeds, so the result depends only on
    ``(model, n_samples, seed)``, never on the worker count.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if standardize not in ("model", "empirical"):
        raise ValueError(f"standardize must be 'model' or 'empirical', got {standardize!r}")
    if np.any(model.sigma2_x <= 0) or np.any(model.sigma2_y <= 0):
        raise ValueError("sign tally requires strictly positive variances")
    sd_x = np.sqrt(model.sigma2_x)
    sd_y = np.sqrt(model.sigma2_y)

    def run_chunk(item):
        child, m = item
        rng = np.random.Generator(np.random.PCG64(child))
        zx = rng.standard_normal((m, model.dim))
        zy = rng.standard_normal((m, model.dim))
        if standardize == "model":
            return _kernels.sign_tally(zx, zy, model.mu_x, sd_x, model.mu_y, sd_y)
        return _empirical_tally(zx, zy, model.mu_x, sd_x, model.mu_y, sd_y)

    parts = map_ordered(run_chunk, _chunk_plan(n_samples, seed))
    flips = sum(p[0] for p in parts)
    raw_nonpos = sum(p[1] for p in parts)
    norm_pos = sum(p[2] for p in parts)
    return SignTally(n_samples, flips, raw_nonpos, norm_pos, seed, standardize)


def _empirical_tally(zx, zy, mu_x, sd_x, mu_y, sd_y):
    # Per-token standardization by the sample's own mean/std, the
    # secondary mode mirroring what a per-token normalization layer sees.
    x = mu_x + sd_x * zx
    y = mu_y + sd_y * zy
    xn = _standardize_rows(x)
    yn = _standardize_rows(y)
    raw = np.einsum("ij,ij->i", x, y)
    nrm = np.einsum("ij,ij->i", xn, yn)
    flips = int(np.count_nonzero(((raw > 0) & (nrm < 0)) | ((raw < 0) & (nrm > 0))))
    return flips, int(np.count_nonzero(raw <= 0)), int(np.count_nonzero(nrm > 0))


def _standardize_rows(x):
    centered = x - x.mean(axis=1, keepdims=True)
    std = x.std(axis=1, keepdims=True)
    return centered / np.maximum(std, 1e-300)


def estimate_signflip(
    model: GaussianTokenModel, n_samples: int, seed: int, standardize: str = "model"
) -> SignFlipEstimate:
    """Monte Carlo estimate of ``Pr(sign(x.T y) != sign(x~.T y~))``."""
    tally = tally_signs(model, n_samples, seed, standardize)
    return SignFlipEstimate(tally.p_flip, n_samples, tally.std_err(tally.n_flip), seed)


def corollary_ratio(dim: int) -> float:
    """Boundary mean/std ratio ``6 / dim**0.25`` of the shared-mean condition."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return 6.0 / float(dim) ** 0.25


def sweep_dimensions(
    dims, n_samples: int, seed: int, ratio: float | None = None, sigma2: float = 1.0
) -> list[dict]:
    """Flip-probability sweep across dimensions at a fixed mean/std ratio.

    ``ratio=None`` uses the boundary ratio ``6 / dim**0.25`` per dimension.
    Each row reports the condition verdicts and the flip estimate for the
    shared model at that dimension; rows use per-dimension derived seeds.
    """
    rows = []
    for i, dim in enumerate(dims):
        r = corollary_ratio(dim) if ratio is None else float(ratio)
        sigma = math.sqrt(sigma2)
        model = GaussianTokenModel.shared(r * sigma, sigma2, dim)
        est = estimate_signflip(model, n_samples, seed + i)
        rows.append(
            {
                "dim": int(dim),
                "ratio": r,
                "corollary_holds": corollary_condition(r * sigma, sigma, r * sigma, sigma, dim),
                "theorem_holds": theorem_condition(model),
                "p_hat": est.p_hat,
                "std_err": est.std_err,
                "seed": seed + i,
            }
        )
    return rows
