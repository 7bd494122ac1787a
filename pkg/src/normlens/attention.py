"""Self-attention scores and the metrics that quantify how a
normalization method shifts them.

Scores follow the query==key simplification: row ``(n, i)`` is
``softmax(x[n, i] @ x[n].T / sqrt(D))``, the attention of anchor token
``i`` over its own sequence.  A shift report compares the score rows of a
raw batch against the rows of its normalized counterpart using Chebyshev
distance, cosine similarity, KL divergence (raw distribution as the
reference), and the entropy of each side.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import softmax_last_axis, validate_token_batch
from .norms import NormConfig, normalize

#: Histogram resolution for metric summaries.
HIST_BINS = 100

#: Whether larger values of each report metric indicate better fidelity.
METRIC_DIRECTIONS = {
    "chebyshev": "lower_is_better",
    "cosine": "higher_is_better",
    "kl": "lower_is_better",
    "entropy_original": "higher_is_better",
    "entropy_normalized": "higher_is_better",
}


def attention_scores(x, scale_dim: int | None = None) -> np.ndarray:
    """Row-stochastic ``(N, L, L)`` self-attention scores of a batch.

    Logits are scaled by ``1/sqrt(scale_dim)`` (defaults to the feature
    dimension of ``x``).
    """
    x = validate_token_batch(x)
    dim = x.shape[2] if scale_dim is None else int(scale_dim)
    if dim < 1:
        raise ValueError(f"scale_dim must be >= 1, got {dim}")
    logits = np.matmul(x, np.swapaxes(x, 1, 2)) / math.sqrt(dim)
    if not np.all(np.isfinite(logits)):
        raise ValueError("attention logits overflowed; token magnitudes too large")
    return softmax_last_axis(logits)


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("expected 1-D vectors")
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def chebyshev(a, b) -> float:
    """Maximum absolute coordinate difference; in [0, 1] for probability vectors."""
    a, b = _check_pair(a, b)
    return float(np.max(np.abs(a - b)))


def cosine_sim(a, b) -> float:
    """Cosine similarity; in (0, 1] for probability vectors."""
    a, b = _check_pair(a, b)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(a @ b / (na * nb))


def kl_div(a, b) -> float:
    """KL divergence ``sum(a * (log a - log b))`` with ``0 log 0 := 0``.

    Returns ``inf`` when some ``b[j] == 0`` has ``a[j] > 0``; softmax
    outputs are strictly positive so this arises only for degenerate
    hand-built inputs.
    """
    a, b = _check_pair(a, b)
    mask = a > 0
    if np.any(b[mask] == 0.0):
        return math.inf
    av = a[mask]
    return float(np.sum(av * (np.log(av) - np.log(b[mask]))))


def entropy(a) -> float:
    """Shannon entropy ``-sum(a log a)`` in nats, with ``0 log 0 := 0``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a 1-D probability vector")
    av = a[a > 0]
    return float(-np.sum(av * np.log(av)))


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p), 0.0)
    return -terms.sum(axis=-1)


def _kl_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(a > 0, a * (np.log(a) - np.log(b)), 0.0)
    return terms.sum(axis=-1)


def _cosine_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    num = np.einsum("...j,...j->...", a, b)
    return num / (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1))


@dataclass(frozen=True)
class MetricReport:
    """Per-anchor shift metrics plus distribution summaries.

    Each metric array has shape ``(N, L)``: one value per anchor row.
    ``summaries[metric]`` holds mean, midpoint-interpolated median and
    q05/q95 quantiles, and a 100-bin histogram over the metric's fixed
    range ([0, 1] for chebyshev/cosine, [0, log L] for KL and the
    entropies; KL values above log L are counted into the top bin and
    reported in ``n_clipped``).
    """

    method: str
    n: int
    l: int
    scale_dim: int
    chebyshev: np.ndarray
    cosine: np.ndarray
    kl: np.ndarray
    entropy_original: np.ndarray
    entropy_normalized: np.ndarray
    summaries: dict = field(default_factory=dict)
    directions: dict = field(default_factory=lambda: dict(METRIC_DIRECTIONS))

    def metric(self, name: str) -> np.ndarray:
        return getattr(self, name)


def _summarize(values: np.ndarray, lo: float, hi: float) -> dict:
    flat = values.ravel()
    clipped = np.clip(flat, lo, hi)
    n_clipped = int(np.count_nonzero(flat > hi) + np.count_nonzero(flat < lo))
    counts, _ = np.histogram(clipped, bins=HIST_BINS, range=(lo, hi))
    return {
        "mean": float(flat.mean()),
        "median": float(np.quantile(flat, 0.5, method="midpoint")),
        "q05": float(np.quantile(flat, 0.05, method="midpoint")),
        "q95": float(np.quantile(flat, 0.95, method="midpoint")),
        "hist_lo": lo,
        "hist_hi": hi,
        "hist_counts": counts.tolist(),
        "n_clipped": n_clipped,
    }


def shift_report(x, cfg: NormConfig, scale_dim: int | None = None) -> MetricReport:
    """Compare attention scores before and after normalization.

    Computes scores ``A`` from ``x`` and ``A~`` from ``normalize(x, cfg)``
    (both scaled by the same ``scale_dim``), then all four shift metrics
    per anchor row.
    """
    x = validate_token_batch(x)
    scores = attention_scores(x, scale_dim)
    scores_norm = attention_scores(normalize(x, cfg), scale_dim)
    n, l = scores.shape[0], scores.shape[1]
    log_l = math.log(l) if l > 1 else 1.0
    metrics = {
        "chebyshev": np.max(np.abs(scores - scores_norm), axis=-1),
        "cosine": _cosine_rows(scores, scores_norm),
        "kl": _kl_rows(scores, scores_norm),
        "entropy_original": _entropy_rows(scores),
        "entropy_normalized": _entropy_rows(scores_norm),
    }
    ranges = {
        "chebyshev": (0.0, 1.0),
        "cosine": (0.0, 1.0),
        "kl": (0.0, log_l),
        "entropy_original": (0.0, log_l),
        "entropy_normalized": (0.0, log_l),
    }
    summaries = {name: _summarize(vals, *ranges[name]) for name, vals in metrics.items()}
    return MetricReport(
        method=cfg.label(),
        n=n,
        l=l,
        scale_dim=x.shape[2] if scale_dim is None else int(scale_dim),
        summaries=summaries,
        **metrics,
    )


def softmax_order_invariance(v, transform: str, param: float | None = None) -> bool:
    """Whether a logit transformation preserves the softmax importance order.

    ``transform`` is one of ``"stretch"`` (multiply by ``param > 0``),
    ``"translate"`` (add ``param``), or ``"reflect"`` (negate).  ``v`` must
    have pairwise-distinct entries, otherwise the order is undefined and a
    ``ValueError`` is raised.  Returns True when the full ranking of the
    softmax output is unchanged; reflection reverses it exactly.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a non-empty 1-D vector")
    if np.unique(v).size != v.size:
        raise ValueError("tied entries: importance order undefined")
    if transform == "stretch":
        if param is None or param <= 0:
            raise ValueError("stretch requires param > 0")
        w = param * v
    elif transform == "translate":
        if param is None:
            raise ValueError("translate requires a param")
        w = v + param
    elif transform == "reflect":
        w = -v
    else:
        raise ValueError(f"unknown transform {transform!r}")

    # Rank softmax outputs in the log domain: log-softmax shares the exact
    # ordering of softmax but never underflows to tied zeros.
    def log_softmax_order(u):
        shifted = u - u.max()
        return np.argsort(shifted - np.log(np.exp(shifted).sum()))

    return bool(np.array_equal(log_softmax_order(v), log_softmax_order(w)))
