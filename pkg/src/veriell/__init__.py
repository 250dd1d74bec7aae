"""Verified existence proofs for -Lap(u) = f(u) on the unit square.

Interval arithmetic, verified linear algebra and exact-rational Legendre
calculus feed a block operator-matrix formulation of the infinite-
dimensional Newton method; the outputs are machine-checkable certificates
of existence (and local uniqueness) with coefficientwise error enclosures.
"""

from .interval import Interval, IntervalArray, IntervalDomainError
from .linalg import Enclosure, InconclusiveError, gen_eig_bounds, krawczyk_solve, \
    spectral_norm_ub, verified_solve
from .legendre import SpectralFn, LegPoly2D, basis_eval, fn_norms, gram_matrices, \
    shifted_legendre_eval, weighted_gram
from .constants import ConstantProvider, embedding_L4, poincare_constant
from .blocks import (
    BlockNormBounds,
    LinearizedProblem,
    PolyNonlinearity,
    assemble_linearization,
    l_inverse_norm,
    ritz_error_constant,
    schur_bounds,
    schur_bounds_alt,
    t_inverse_norm,
    tail_bounds,
)
from .verify import (
    CandidateSet,
    VerificationCertificate,
    enclose_approx,
    fixed_point_verify,
    galerkin_approx,
    kantorovich_verify,
    nonlinear_image,
    residual_tail,
    verify_problem,
)

__version__ = "0.1.0"

__all__ = [
    "Interval", "IntervalArray", "IntervalDomainError",
    "Enclosure", "InconclusiveError", "verified_solve", "krawczyk_solve",
    "spectral_norm_ub", "gen_eig_bounds",
    "SpectralFn", "LegPoly2D", "basis_eval", "shifted_legendre_eval",
    "gram_matrices", "weighted_gram", "fn_norms",
    "ConstantProvider", "poincare_constant", "embedding_L4",
    "PolyNonlinearity", "LinearizedProblem", "BlockNormBounds",
    "assemble_linearization", "t_inverse_norm", "tail_bounds",
    "schur_bounds", "schur_bounds_alt", "l_inverse_norm", "ritz_error_constant",
    "CandidateSet", "VerificationCertificate", "galerkin_approx",
    "enclose_approx", "residual_tail", "nonlinear_image",
    "fixed_point_verify", "kantorovich_verify", "verify_problem",
]
