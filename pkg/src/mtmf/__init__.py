"""Multivariate Taylor measure functions.

An MTMF ``T_{g, a}(B)`` is the series ``sum_{n in B} a_n(x) g(x)^n / n!``.
The package builds, evaluates and differentiates such representations,
measures them with a weighted inner product, generates classical special
functions as MTMFs and solves linear and first-order nonlinear ODEs whose
solutions come back as MTMFs.
"""
from .errors import (
    ArityError,
    BudgetExceededError,
    ExprError,
    ExprSyntaxError,
    MtmfError,
    RankDeficiencyError,
    RecoveryError,
    SingularSystemError,
)
from .expr import diff, evaluate, parse, simplify, to_text
from .geometry import distance, gram_schmidt, inner_product, norm
from .indexset import IndexSet
from .quadrature import QuadratureSpec, integrate
from .taylor import (
    Mtmf,
    TruncationPolicy,
    approx_simple,
    from_coefficients,
    from_generator,
    linear_combine,
    mtmf_from_dict,
    pointwise_product,
    simple_rep,
    trivial_rep,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError", "BudgetExceededError", "ExprError", "ExprSyntaxError", "IndexSet", "Mtmf",
    "MtmfError", "QuadratureSpec", "RankDeficiencyError", "RecoveryError", "SingularSystemError",
    "TruncationPolicy", "approx_simple", "diff", "distance", "evaluate", "from_coefficients",
    "from_generator", "gram_schmidt", "inner_product", "integrate", "linear_combine",
    "mtmf_from_dict", "norm", "parse", "pointwise_product", "simple_rep", "simplify", "to_text",
    "trivial_rep",
]
