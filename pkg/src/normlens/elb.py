"""Attention-entropy lower bound for norm-scaled tokens.

Tokens scaled to a common norm ``D**(k/2)`` produce attention logits
``a * c`` with ``a = D**(k - 1/2)`` and pairwise direction dot products
``c in [-1, 1]``.  The entropy of any attention row is then bounded below
by

    ELB(k; L, D) = log(L - 1 + e^d) - d * e^d / (L - 1 + e^d),
    d = 2 * D**(k - 1/2),

the row entropy of the configuration whose context tokens all sit at dot
product -1 from the anchor.  ELB is strictly decreasing in ``k`` (for
``L >= 2``, ``D >= 2``) and spans ``(0, log L)``.

``elb_bruteforce`` searches actual attention-row entropies over a grid of
context configurations as an independent check of the closed form.  Note
the bound is attained by the all-(-1) configuration only for
sufficiently peaked rows: for ``L >= 4`` and small ``d`` a balanced
configuration (half the context at +1) has strictly lower entropy, so the
grid minimum can undercut the closed form there.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .attention import entropy
from .core import softmax_row

#: Above this many grid combinations the scan switches to the exact
#: endpoint reduction (see ``elb_bruteforce``).
DEFAULT_MAX_SCAN = 20_000_000


def _check_ld(length: int, dim: int):
    if length < 2:
        raise ValueError(f"length must be >= 2, got {length}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")


def _d_of(k: float, dim: int) -> float:
    if not math.isfinite(k):
        raise ValueError(f"k must be finite, got {k}")
    return 2.0 * float(dim) ** (k - 0.5)


def elb(k: float, length: int, dim: int) -> float:
    """Entropy lower bound ``log(L-1+e^d) - d e^d / (L-1+e^d)``.

    Evaluated in the overflow-safe form ``log1p(t) + d*t/(1+t)`` with
    ``t = (L-1) * exp(-d)``, which stays finite for arbitrarily large
    ``d`` (the naive form overflows near ``d = 709``).
    """
    _check_ld(length, dim)
    d = _d_of(k, dim)
    if not math.isfinite(d):
        return 0.0
    t = (length - 1) * math.exp(-d)
    return math.log1p(t) + d * t / (1.0 + t)


def elb_dk(k: float, length: int, dim: int) -> float:
    """Derivative of ``elb`` with respect to ``k``.

    Equals ``[d e^d (1-L) / (L-1+e^d)^2] * d * ln D`` via the chain rule
    with ``dd/dk = d ln D``; strictly negative for ``L > 1`` and
    ``D >= 2``, identically zero at ``D = 1``.
    """
    _check_ld(length, dim)
    d = _d_of(k, dim)
    if not math.isfinite(d):
        return 0.0
    t = (length - 1) * math.exp(-d)
    return (1 - length) * d * d * math.log(dim) * math.exp(-d) / (1.0 + t) ** 2


@dataclass(frozen=True)
class ElbPoint:
    """One sample of the bound: inputs, the scale ``d``, and the value."""

    k: float
    length: int
    dim: int
    d_val: float
    elb: float


def elb_curve(length: int, dim: int, k_min: float, k_max: float, steps: int) -> list[ElbPoint]:
    """Uniformly spaced samples of the bound over ``[k_min, k_max]``."""
    _check_ld(length, dim)
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if not k_min < k_max:
        raise ValueError(f"need k_min < k_max, got {k_min} >= {k_max}")
    points = []
    for k in np.linspace(k_min, k_max, steps):
        k = float(k)
        points.append(ElbPoint(k, length, dim, _d_of(k, dim), elb(k, length, dim)))
    return points


def k50(length: int, dim: int, tol: float = 1e-9) -> float:
    """The ``k`` at which the bound equals half its maximum ``log L``.

    Unique by strict monotonicity.  The bracket starts at ``[-1, 3]`` and
    doubles outward from 0 until it straddles the target; bisection then
    runs until ``|elb(k) - log(L)/2| <= tol``.
    """
    _check_ld(length, dim)
    if dim < 2:
        raise ValueError("no solution: the bound is constant in k at dim=1")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    target = 0.5 * math.log(length)
    lo, hi = -1.0, 3.0
    for _ in range(60):
        if elb(lo, length, dim) > target:
            break
        lo *= 2.0
    else:
        raise RuntimeError("bracket expansion failed on the low side")
    for _ in range(60):
        if elb(hi, length, dim) < target:
            break
        hi *= 2.0
    else:
        raise RuntimeError("bracket expansion failed on the high side")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        val = elb(mid, length, dim)
        if abs(val - target) <= tol:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"bisection did not reach tol={tol} for L={length}, D={dim}")


def elb_at_config(k: float, length: int, dim: int, context_dots) -> float:
    """Attention-row entropy for explicit anchor-context dot products.

    The row's logits are ``D**(k-1/2) * (1, c_1, ..., c_{L-1})`` for
    ``c = context_dots``; the entropy is computed through the generic
    softmax and entropy routines, independent of the closed form.
    """
    _check_ld(length, dim)
    c = np.asarray(context_dots, dtype=np.float64)
    if c.shape != (length - 1,):
        raise ValueError(f"context_dots must have shape ({length - 1},), got {c.shape}")
    if np.any(np.abs(c) > 1.0):
        raise ValueError("context dot products must lie in [-1, 1]")
    a = float(dim) ** (k - 0.5)
    if not math.isfinite(a):
        raise ValueError(f"logit scale overflows for k={k}, dim={dim}")
    logits = a * np.concatenate(([1.0], c))
    return entropy(softmax_row(logits))


def _tables(k: float, length: int, dim: int, grid: int):
    # Shifted logits u = a*(c - 1) <= 0 keep exponentials in [0, 1].
    a = float(dim) ** (k - 0.5)
    if not math.isfinite(a):
        raise ValueError(f"logit scale overflows for k={k}, dim={dim}")
    g = np.linspace(-1.0, 1.0, grid)
    u = a * (g - 1.0)
    zt = np.exp(u)
    st = u * zt
    return zt, st


def _h_at(zt, st, indices) -> float:
    z = 1.0 + sum(float(zt[i]) for i in indices)
    s = sum(float(st[i]) for i in indices)
    return math.log(z) - s / z


def elb_bruteforce(
    k: float, length: int, dim: int, grid: int, max_scan: int = DEFAULT_MAX_SCAN
) -> float:
    """Minimum attention-row entropy over a grid of context configurations.

    Searches ``c in [-1, 1]**(L-1)`` with every context coordinate on a
    uniform ``grid``-point lattice (anchor fixed at dot product 1) and
    returns the smallest row entropy found.  The search space is reduced
    exactly in two stages:

    * row entropy is symmetric in the context coordinates, so only
      non-decreasing tuples are scanned;
    * when the reduced count still exceeds ``max_scan``, the exact
      per-coordinate endpoint property is used: along any single
      coordinate the row entropy rises to one interior peak and falls, so
      the lattice minimum lies on extreme grid values.  The scan then
      covers all ``2**(L-1)`` endpoint assignments plus the all-equal
      diagonal of the full grid.

    Both stages return the exact lattice minimum; the reductions are
    cross-checked against the literal product scan in the test suite.
    """
    if not 2 <= length <= 6:
        raise ValueError(f"length must be in [2, 6] for the brute-force oracle, got {length}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    zt, st = _tables(k, length, dim, grid)
    m = length - 1
    if math.comb(grid + m - 1, m) <= max_scan:
        return float(_kernels.entropy_scan(zt, st, m))
    best = math.inf
    for combo in itertools.product((0, grid - 1), repeat=m):
        best = min(best, _h_at(zt, st, combo))
    # All-equal diagonal, vectorized: c_j = g[t] for every j.
    z = 1.0 + m * zt
    s = m * st
    best = min(best, float(np.min(np.log(z) - s / z)))
    return best
