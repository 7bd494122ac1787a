"""normlens: normalization kernels for token sequences and the analysis
toolkit around them (attention-shift metrics, dot-product sign-flip
estimation, attention-entropy floor solver, gradient checks)."""

from ._backend import active_backend
from .attention import (
    MetricReport,
    attention_scores,
    chebyshev,
    cosine_sim,
    entropy,
    kl_div,
    shift_report,
    softmax_order_invariance,
)
from .core import axis_stats, gaussian_batch, softmax_row, validate_token_batch
from .elb import ElbPoint, elb, elb_at_config, elb_bruteforce, elb_curve, elb_dk, k50
from .embeddings import EmbeddingFile, ingest, load_embeddings, sample_sequences
from .gradcheck import (
    AffineLayer,
    GradBundle,
    alpha_scaling_check,
    backward_affine_unitnorm,
    finite_difference_gradient,
    run_gradcheck,
    unit_scale_vector,
    unitnorm_jacobian,
)
from .norms import DEFAULT_UNITNORM_K, METHODS, NormConfig, normalize, token_l2_norms
from .signflip import (
    GaussianTokenModel,
    SignFlipEstimate,
    SignTally,
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

__version__ = "0.1.0"

__all__ = [
    "AffineLayer",
    "DEFAULT_UNITNORM_K",
    "ElbPoint",
    "EmbeddingFile",
    "GaussianTokenModel",
    "GradBundle",
    "METHODS",
    "MetricReport",
    "NormConfig",
    "SignFlipEstimate",
    "SignTally",
    "active_backend",
    "alpha_scaling_check",
    "attention_scores",
    "axis_stats",
    "backward_affine_unitnorm",
    "chebyshev",
    "corollary_condition",
    "corollary_implies_theorem_check",
    "corollary_ratio",
    "cosine_sim",
    "dot_mean",
    "dot_variance",
    "elb",
    "elb_at_config",
    "elb_bruteforce",
    "elb_curve",
    "elb_dk",
    "entropy",
    "estimate_signflip",
    "finite_difference_gradient",
    "gaussian_batch",
    "ingest",
    "k50",
    "kl_div",
    "load_embeddings",
    "normalize",
    "run_gradcheck",
    "sample_sequences",
    "shift_report",
    "softmax_order_invariance",
    "softmax_row",
    "sweep_dimensions",
    "tally_signs",
    "theorem_condition",
    "theorem_condition_sides",
    "token_l2_norms",
    "unit_scale_vector",
    "unitnorm_jacobian",
    "validate_token_batch",
]
