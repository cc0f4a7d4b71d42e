"""OPINS driver: split x into a particular part in range(B^T) and a
null-space part obtained from the projected, singular-but-compatible inner
equation, then recover the multipliers.

The inner coefficient operator is the projected map v -> P(A(Pv)) with P the
orthogonal projector onto null(B); it is applied, never assembled.  Inner
solves always start from zero, which is what the uniqueness and minimum-norm
results rely on.

Singular-system guard: when the caller declares the null-space equation
singular, only an unpreconditioned solve or the projected preconditioner
applied from the LEFT is accepted.  Applying a preconditioner through the
symmetric recurrence can move iterates out of null(B)-consistent subspaces
and silently lose the minimum-norm property, so that combination is rejected
with a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import krylov
from .linalg import frobenius_norm
from .operators import LinearOperator
from .preconditioners import InvertibleOperator, ProjectedPreconditioner, build_g
from .projection import Projector, particular_solution, recover_multipliers
from .qrcp import RangeBasisFactorization, qrcp_factor

__all__ = ["SaddleSystem", "OpinsOptions", "OpinsReport", "OpinsError", "opins_solve"]


class OpinsError(ValueError):
    """Invalid solver configuration or system."""


@dataclass
class SaddleSystem:
    """Blocks of the saddle-point system: A (n x n), B (m x n), f, g.

    Compatibility of f (f in range(A) + range(B^T)) is assumed, not checked.
    ``a_symmetric`` selects the symmetric inner solver.
    """

    a: object
    b: object
    f: np.ndarray
    g: np.ndarray
    a_symmetric: bool = False

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        n_a, n_a2 = self.a.shape
        m_b, n_b = self.b.shape
        if n_a != n_a2:
            raise OpinsError(f"A must be square, got {self.a.shape}")
        if n_b != n_a:
            raise OpinsError(f"B has {n_b} columns but A is {n_a} x {n_a}")
        if self.f.shape != (n_a,):
            raise OpinsError(f"f has shape {self.f.shape}, expected ({n_a},)")
        if self.g.shape != (m_b,):
            raise OpinsError(f"g has shape {self.g.shape}, expected ({m_b},)")

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.b.shape[0]

    def kkt_matrix(self):
        """Dense assembled KKT matrix (oracle/metric use only)."""
        a = self.a.toarray() if sp.issparse(self.a) else np.asarray(self.a, float)
        b = self.b.toarray() if sp.issparse(self.b) else np.asarray(self.b, float)
        k = np.zeros((self.n + self.m, self.n + self.m))
        k[:self.n, :self.n] = a
        k[:self.n, self.n:] = b.T
        k[self.n:, :self.n] = b
        return k

    def rhs_full(self):
        return np.concatenate([self.f, self.g])


@dataclass
class OpinsOptions:
    """Solver configuration.

    ``precond`` is one of ``none``, ``simple`` (G^{-1} directly), or
    ``projected`` (P_G).  ``g_kind`` picks the G builder; ``user-operator``
    takes ``g_op``.  ``precond_side='auto'`` resolves to the symmetric
    recurrence for symmetric nonsingular problems and to left application
    otherwise.  ``declared_singular`` is caller-supplied problem metadata;
    singularity of the null-space equation is never detected automatically.
    ``maxit=0`` means 10 * n.
    """

    rank_tol: float = 1e-12
    solve_tol: float = 1e-10
    maxit: int = 0
    restart: int = 50
    precond: str = "none"
    g_kind: str = "identity"
    g_op: Optional[InvertibleOperator] = None
    precond_side: str = "auto"
    declared_singular: bool = False
    compute_y: bool = True
    inner_callback: Optional[Callable] = None

    def __post_init__(self):
        if self.rank_tol <= 0 or self.solve_tol <= 0:
            raise OpinsError("tolerances must be positive")
        if self.precond not in ("none", "simple", "projected"):
            raise OpinsError(f"unknown precond {self.precond!r}")
        if self.g_kind not in ("identity", "jacobi", "ilu0", "user-operator"):
            raise OpinsError(f"unknown g_kind {self.g_kind!r}")
        if self.precond_side not in ("auto", "left", "symmetric"):
            raise OpinsError(f"unknown precond_side {self.precond_side!r}")


@dataclass
class OpinsReport:
    """Solution and diagnostics: x = x_p + x_n with x_n the projected inner w."""

    x: np.ndarray
    y: Optional[np.ndarray]
    x_p: np.ndarray
    x_n: np.ndarray
    rank_b: int
    inner: krylov.SolveOutcome
    metrics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.inner.status == krylov.CONVERGED


def _resolve_side(sys, opts):
    if opts.precond == "none":
        return None
    side = opts.precond_side
    if side == "auto":
        if opts.declared_singular:
            side = "left"
        elif sys.a_symmetric:
            side = "symmetric"
        else:
            side = "left"
    if opts.declared_singular:
        if opts.precond == "simple":
            raise OpinsError(
                "singular systems accept only precond='none' or the projected "
                "preconditioner applied from the left")
        if side == "symmetric":
            raise OpinsError(
                "symmetric preconditioner application can alter the null space "
                "of the projected operator; use precond_side='left' (or no "
                "preconditioner) for singular systems")
    if not sys.a_symmetric and side == "symmetric":
        raise OpinsError("symmetric preconditioner application requires a symmetric system")
    return side


def _build_precond(sys, opts, fact):
    if opts.precond == "none":
        return None
    if opts.g_kind == "user-operator":
        if opts.g_op is None:
            raise OpinsError("g_kind='user-operator' requires g_op")
        g_op = opts.g_op
    else:
        g_op = build_g(sys.a, opts.g_kind)
    if opts.precond == "simple":
        return g_op.as_solver_operator()
    return ProjectedPreconditioner(g_op, fact).as_solver_operator()


def opins_solve(sys, opts=None):
    """Solve the saddle-point system for x (and optionally y).

    Returns an OpinsReport.  For a nonsingular null-space equation the x
    recovered is the unique primal solution; for compatible singular systems
    solved without a preconditioner (or with the projected preconditioner
    from the left) the computed x has minimum norm among all solutions that
    minimize ||g - B x||.  Inner-solver failures surface in the report
    status, never as exceptions.
    """
    opts = opts or OpinsOptions()
    n = sys.n
    maxit = opts.maxit if opts.maxit > 0 else 10 * max(n, 1)
    side = _resolve_side(sys, opts)

    if sys.m == 0:
        # no constraints: the projector is the identity and the inner solve
        # degenerates to A x = f
        fact = RangeBasisFactorization(nrows=n, ncols=0, work=np.zeros((n, 0)),
                                       taus=np.zeros(0), permutation=np.arange(0),
                                       rank=0, tol_used=opts.rank_tol)
    else:
        fact = qrcp_factor(sys.b.toarray().T if sp.issparse(sys.b) else np.asarray(sys.b, float).T,
                           opts.rank_tol)
    projector = Projector(fact)
    x_p = particular_solution(projector, sys.g)

    rhs = projector.complement(sys.f - sys.a @ x_p)
    pns_op = LinearOperator(
        dim=n,
        apply=lambda v: projector.complement(sys.a @ projector.complement(v)),
        symmetric=sys.a_symmetric)

    b_norm_frob = frobenius_norm(sys.b)
    purity = []

    def inner_cb(it, w_k, relres):
        x_n_k = projector.complement(w_k)
        denom = b_norm_frob * np.linalg.norm(w_k)
        drift = np.linalg.norm(sys.b @ x_n_k)
        purity.append(drift / denom if denom > 0 else 0.0)
        if opts.inner_callback is not None:
            opts.inner_callback(it, w_k, relres)

    precond = _build_precond(sys, opts, fact)
    if np.linalg.norm(rhs) == 0.0:
        inner = krylov.SolveOutcome(np.zeros(n), krylov.CONVERGED, 0, [])
    elif sys.a_symmetric and not (side == "left" and precond is not None):
        inner = krylov.minres(pns_op, rhs, opts.solve_tol, maxit,
                              precond=precond, callback=inner_cb)
    else:
        inner = krylov.gmres(pns_op, rhs, opts.restart, opts.solve_tol, maxit,
                             left_precond=precond, callback=inner_cb)

    x_n = projector.complement(inner.solution)
    x = x_p + x_n
    y = None
    if opts.compute_y:
        y = recover_multipliers(projector, sys.f - sys.a @ x)

    rhs_norm = np.linalg.norm(rhs)
    res_inner = rhs - pns_op(x_n)
    metrics = {
        "relres_x": float(np.linalg.norm(res_inner) / rhs_norm) if rhs_norm > 0 else 0.0,
        "constraint_residual": float(np.linalg.norm(sys.g - sys.b @ x)),
        "norm_x": float(np.linalg.norm(x)),
        "null_space_purity_max": float(max(purity)) if purity else 0.0,
    }
    if y is not None:
        r_full = sys.rhs_full() - np.concatenate([sys.a @ x + sys.b.T @ y, sys.b @ x])
        denom = np.linalg.norm(sys.rhs_full())
        metrics["relres_full"] = float(np.linalg.norm(r_full) / denom) if denom > 0 \
            else float(np.linalg.norm(r_full))
        metrics["norm_y"] = float(np.linalg.norm(y))
    return OpinsReport(x=x, y=y, x_p=x_p, x_n=x_n, rank_b=fact.rank,
                       inner=inner, metrics=metrics)
