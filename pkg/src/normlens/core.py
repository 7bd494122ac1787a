"""Dense-array substrate: validated token batches, seeded Gaussian
sampling, overflow-safe softmax, and axis statistics.

A token batch is a float64 array of shape ``(N, L, D)``: ``N`` sequences
of ``L`` tokens with ``D`` features each.  All operations here are pure
functions over such arrays and are safe for concurrent read-only use.
"""

import numpy as np

AXES = {"batch": 0, "sequence": 1, "feature": 2}


def validate_token_batch(x) -> np.ndarray:
    """Coerce ``x`` to a float64 ``(N, L, D)`` array and check invariants.

    Raises ``ValueError`` for wrong rank, empty axes, or non-finite
    entries.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"token batch must have shape (N, L, D), got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise ValueError(f"token batch axes must be >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("token batch contains NaN or Inf entries")
    return arr


def gaussian_batch(n: int, l: int, mu, sigma2, seed: int) -> np.ndarray:
    """Sample an ``(n, l, D)`` batch of independent Gaussian tokens.

    Feature ``d`` of every token is drawn from ``Normal(mu[d], sigma2[d])``.
    Sampling is deterministic per seed: a PCG64 stream feeds numpy's
    ziggurat standard-normal generator and the draws are mapped through
    ``mu + sqrt(sigma2) * z``.  The contract is bit-identical output for
    equal seeds within this package, not portability across generators.
    """
    if n < 1 or l < 1:
        raise ValueError(f"batch dims must be >= 1, got n={n}, l={l}")
    mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=np.float64))
    if mu.ndim != 1 or sigma2.shape != mu.shape:
        raise ValueError("mu and sigma2 must be 1-D vectors of equal length")
    if mu.size < 1:
        raise ValueError("feature dimension must be >= 1")
    if np.any(sigma2 < 0):
        raise ValueError("sigma2 must be entrywise >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((n, l, mu.size))
    return mu + np.sqrt(sigma2) * z


def softmax_row(v) -> np.ndarray:
    """Softmax of a single vector, computed with max-subtraction.

    The output is strictly positive and sums to 1 (within 1e-12) for any
    finite input; adding a constant to ``v`` leaves it unchanged.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("softmax_row expects a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("softmax_row input must be finite")
    e = np.exp(v - v.max())
    return e / e.sum()


def softmax_last_axis(v: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax along the last axis of ``v``."""
    e = np.exp(v - v.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def axis_stats(x, axes) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and variance of a token batch over named axes.

    ``axes`` is a non-empty subset of ``{"batch", "sequence", "feature"}``.
    Both outputs keep reduced axes as size-1 so they broadcast back onto
    ``x``.  Variance is biased (divide by count), matching the statistics
    definitions used by the normalization methods.
    """
    x = validate_token_batch(x)
    names = list(axes)
    if not names:
        raise ValueError("axes must be a non-empty subset of {batch, sequence, feature}")
    try:
        ax = tuple(sorted({AXES[a] for a in names}))
    except KeyError as exc:
        raise ValueError(f"unknown axis name: {exc.args[0]!r}") from None
    mean = x.mean(axis=ax, keepdims=True)
    var = x.var(axis=ax, keepdims=True)
    return mean, var
