"""Forward transforms for the five normalization methods.

Statistics axes per method, for input ``X`` of shape ``(N, L, D)``:

* ``batchnorm``          -- mean/variance over (batch, sequence), per feature
* ``layernorm_theory``   -- mean/variance over (sequence, feature), per batch element
* ``layernorm_practice`` -- mean/variance over (feature), per token
* ``rmsnorm``            -- per-token scaling ``sqrt(D) * x / ||x||``
* ``unitnorm``           -- per-token scaling ``D**(k/2) * x / ||x||``, no affine

The three center-and-scale methods compute ``(X - mean) / sqrt(var + eps)``
and then an optional per-feature affine ``gamma * X + beta``; rmsnorm takes
the same optional affine.  unitnorm's output is the scaled direction itself,
so it never carries affine parameters.  rmsnorm is exactly unitnorm at
``k = 1``.
"""

from dataclasses import dataclass

import numpy as np

from .core import axis_stats, validate_token_batch

METHODS = (
    "batchnorm",
    "layernorm_theory",
    "layernorm_practice",
    "rmsnorm",
    "unitnorm",
)

_STAT_AXES = {
    "batchnorm": ("batch", "sequence"),
    "layernorm_theory": ("sequence", "feature"),
    "layernorm_practice": ("feature",),
}

#: Default unitnorm sparsity modulus used by the CLI analysis paths.
DEFAULT_UNITNORM_K = 1.5


@dataclass(frozen=True)
class NormConfig:
    """Configuration for :func:`normalize`.

    ``eps`` regularizes the variance of the center-and-scale methods.
    ``k`` is the unitnorm modulus (ignored by every other method).
    ``gamma``/``beta`` are optional per-feature affine constants (length D),
    not allowed for unitnorm.  ``zero_norm`` controls per-token scaling
    when ``||x|| < eps_norm``: ``"guard"`` divides by
    ``max(||x||, eps_norm)``, ``"error"`` raises.
    """

    method: str
    eps: float = 1e-5
    k: float = DEFAULT_UNITNORM_K
    gamma: np.ndarray | None = None
    beta: np.ndarray | None = None
    zero_norm: str = "guard"
    eps_norm: float = 1e-12

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.eps_norm <= 0:
            raise ValueError(f"eps_norm must be > 0, got {self.eps_norm}")
        if self.zero_norm not in ("guard", "error"):
            raise ValueError(f"zero_norm must be 'guard' or 'error', got {self.zero_norm!r}")
        if self.method == "unitnorm" and (self.gamma is not None or self.beta is not None):
            raise ValueError("unitnorm output is the scaled direction itself; affine parameters are not allowed")
        for name in ("gamma", "beta"):
            val = getattr(self, name)
            if val is not None:
                arr = np.asarray(val, dtype=np.float64)
                if arr.ndim != 1:
                    raise ValueError(f"{name} must be a 1-D per-feature vector")
                object.__setattr__(self, name, arr)

    def label(self) -> str:
        """Short human-readable tag, e.g. ``unitnorm(k=1.5)``."""
        if self.method == "unitnorm":
            return f"unitnorm(k={self.k:g})"
        return self.method


def token_l2_norms(x) -> np.ndarray:
    """Euclidean norm of every token; output shape ``(N, L)``."""
    x = validate_token_batch(x)
    return np.linalg.norm(x, axis=2)


def _apply_affine(out: np.ndarray, cfg: NormConfig, dim: int) -> np.ndarray:
    for name in ("gamma", "beta"):
        val = getattr(cfg, name)
        if val is not None and val.shape != (dim,):
            raise ValueError(f"{name} must have shape ({dim},), got {val.shape}")
    if cfg.gamma is not None:
        out = out * cfg.gamma
    if cfg.beta is not None:
        out = out + cfg.beta
    return out


def _scaled_directions(x: np.ndarray, scale: float, cfg: NormConfig) -> np.ndarray:
    norms = np.linalg.norm(x, axis=2, keepdims=True)
    if cfg.zero_norm == "error":
        if np.any(norms < cfg.eps_norm):
            raise ValueError(f"token norm below {cfg.eps_norm:g}; cannot normalize direction")
        safe = norms
    else:
        safe = np.maximum(norms, cfg.eps_norm)
    return scale * x / safe


def normalize(x, cfg: NormConfig) -> np.ndarray:
    """Apply the configured normalization to a token batch.

    Returns a new ``(N, L, D)`` array; the input is never modified.
    """
    x = validate_token_batch(x)
    dim = x.shape[2]
    if cfg.method in _STAT_AXES:
        mean, var = axis_stats(x, _STAT_AXES[cfg.method])
        out = (x - mean) / np.sqrt(var + cfg.eps)
        return _apply_affine(out, cfg, dim)
    if cfg.method == "rmsnorm":
        out = _scaled_directions(x, np.sqrt(dim), cfg)
        return _apply_affine(out, cfg, dim)
    # unitnorm
    return _scaled_directions(x, float(dim) ** (cfg.k / 2.0), cfg)
