"""Orthogonally projected implicit null-space solvers for saddle-point systems.

The block system

    [A  B^T] [x]   [f]
    [B   0 ] [y] = [g]

is solved for x first by splitting it into a particular part in range(B^T)
and a null-space part, with the null-space part obtained from a projected,
singular-but-compatible inner equation solved by a Krylov method.  The
orthonormal basis of range(B^T) comes from a rank-revealing pivoted QR of
B^T, kept as implicit Householder reflectors, so the method pays O(m^2 n)
setup when the number of constraints m is small against n.  Nonsingular
systems recover the unique x; compatible singular systems recover the x of
minimum norm.
"""

from .driver import OpinsError, OpinsOptions, OpinsReport, SaddleSystem, opins_solve
from .krylov import IterationRecord, SolveOutcome, cg, gmres, minres
from .operators import LinearOperator, aslinearoperator
from .preconditioners import (InvertibleOperator, ProjectedPreconditioner,
                              build_g, ilu0_factor, projected_precond_apply)
from .projection import (Projector, particular_solution, project_complement,
                         recover_multipliers)
from .qrcp import RangeBasisFactorization, apply_q_block, qrcp_factor, solve_r

__all__ = [
    "OpinsError", "OpinsOptions", "OpinsReport", "SaddleSystem", "opins_solve",
    "IterationRecord", "SolveOutcome", "cg", "gmres", "minres",
    "LinearOperator", "aslinearoperator",
    "InvertibleOperator", "ProjectedPreconditioner", "build_g", "ilu0_factor",
    "projected_precond_apply",
    "Projector", "particular_solution", "project_complement", "recover_multipliers",
    "RangeBasisFactorization", "apply_q_block", "qrcp_factor", "solve_r",
]

__version__ = "0.1.0"
