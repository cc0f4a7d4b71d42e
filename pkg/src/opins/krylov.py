"""Krylov solvers for compatible, possibly singular systems.

All solvers start from the zero vector, which is what makes the minimum-norm
results for compatible singular systems hold, and all record two residuals
per iteration: the recurrence residual (preconditioned when a preconditioner
is present) and the explicitly recomputed true residual.  A run is reported
``converged`` only when both are at or below the tolerance, so a converged
status always certifies the true relative residual.

Preconditioning contract:

* ``minres`` takes the preconditioner through the standard preconditioned
  Lanczos recurrence (the operator supplies an approximate inverse applied
  once per iteration; no symmetric factor is ever formed).
* ``gmres`` applies the preconditioner from the left to the residuals.
* ``cg`` uses the standard PCG recurrence and reports indefinite breakdown
  (non-positive curvature, or a residual that stops decreasing) as an
  outcome, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .operators import LinearOperator

__all__ = ["IterationRecord", "SolveOutcome", "minres", "gmres", "cg"]

CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"
BREAKDOWN = "breakdown"
STAGNATION = "stagnation"

# relative improvement over one full restart cycle below which GMRES gives up
_STAGNATION_FACTOR = 1e-3


@dataclass
class IterationRecord:
    """One solver iteration: recurrence relres plus named auxiliary norms."""

    iter: int
    relres: float
    aux_norms: dict = field(default_factory=dict)


@dataclass
class SolveOutcome:
    solution: np.ndarray
    status: str
    iterations: int
    history: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == CONVERGED


def _record(history, callback, it, relres, true_relres, x):
    rec = IterationRecord(iter=it, relres=relres,
                          aux_norms={"true_relres": true_relres})
    history.append(rec)
    if callback is not None:
        callback(it, x, true_relres)


def minres(op, b, tol, maxit, precond=None, callback=None):
    """MINRES for symmetric (possibly singular, compatible) systems.

    Started from zero and unpreconditioned, the iterates stay in range(op),
    so a compatible singular solve returns the minimum-norm solution.  A
    preconditioner enters through the preconditioned Lanczos recurrence and
    must act positive definitely on the residual space; a nonpositive inner
    product is reported as ``breakdown``.

    Parameters
    ----------
    op : LinearOperator
        Symmetric operator (caller-declared).
    b : ndarray
        Right-hand side; must lie in range(op) for min-norm guarantees.
    tol : float
        Relative residual tolerance (applied to both the recurrence residual
        and the recomputed true residual).
    maxit : int
        Iteration cap.
    precond : LinearOperator, optional
        Approximate inverse, applied once per iteration.
    callback : callable, optional
        Invoked as ``callback(iter, x_candidate, true_relres)`` each step.
    """
    b = np.asarray(b, dtype=float)
    n = op.dim
    x = np.zeros(n)
    history = []
    normb = np.linalg.norm(b)
    if normb == 0.0:
        return SolveOutcome(x, CONVERGED, 0, history)

    r1 = b.copy()
    y = precond(r1) if precond is not None else r1
    beta1 = float(r1 @ y)
    if beta1 < 0.0:
        return SolveOutcome(x, BREAKDOWN, 0, history)
    if beta1 == 0.0:
        return SolveOutcome(x, CONVERGED, 0, history)
    beta1 = np.sqrt(beta1)

    oldb, beta = 0.0, beta1
    dbar, epsln, phibar = 0.0, 0.0, beta1
    cs, sn = -1.0, 0.0
    w = np.zeros(n)
    w2 = np.zeros(n)
    r2 = r1
    status = MAX_ITERATIONS
    it = 0
    while it < maxit:
        it += 1
        v = y / beta
        y = op(v)
        if it >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        y = precond(r2) if precond is not None else r2
        oldb = beta
        beta = float(r2 @ y)
        if beta < 0.0:
            status = BREAKDOWN
            break
        beta = np.sqrt(beta)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), np.finfo(float).eps)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        relres = phibar / beta1
        true_relres = np.linalg.norm(b - op(x)) / normb
        _record(history, callback, it, relres, true_relres, x)
        if relres <= tol and true_relres <= tol:
            status = CONVERGED
            break
        if beta <= np.finfo(float).eps * beta1:
            # Lanczos space exhausted without reaching the tolerance: stop at
            # the least-squares point (incompatible right-hand side) instead
            # of dividing by the vanishing beta next iteration
            status = BREAKDOWN
            break
    return SolveOutcome(x, status, it, history)


def gmres(op, b, restart, tol, maxit, left_precond=None, callback=None):
    """Restarted GMRES with modified Gram-Schmidt and selective reorthogonalization.

    For singular operators the caller asserts range(op) = range(op^T) and
    compatibility; started from zero and unpreconditioned the converged
    solution is then minimum-norm.  ``left_precond`` is applied to the
    residuals.  A restart cycle that improves the (preconditioned) residual
    by less than a factor of ``1 - 1e-3`` reports ``stagnation``.
    """
    b = np.asarray(b, dtype=float)
    n = op.dim
    x = np.zeros(n)
    history = []
    normb = np.linalg.norm(b)
    if normb == 0.0:
        return SolveOutcome(x, CONVERGED, 0, history)
    pb = left_precond(b) if left_precond is not None else b
    normpb = np.linalg.norm(pb)
    if normpb == 0.0:
        return SolveOutcome(x, BREAKDOWN, 0, history)

    it = 0
    status = None
    prev_cycle = None
    while status is None:
        r = b - op(x)
        pr = left_precond(r) if left_precond is not None else r
        beta = np.linalg.norm(pr)
        if beta / normpb <= tol and np.linalg.norm(r) / normb <= tol:
            status = CONVERGED
            break
        if it >= maxit:
            status = MAX_ITERATIONS
            break
        V = np.zeros((n, restart + 1))
        H = np.zeros((restart + 1, restart))
        givens_c = np.zeros(restart)
        givens_s = np.zeros(restart)
        g = np.zeros(restart + 1)
        g[0] = beta
        V[:, 0] = pr / beta
        xk = x
        k = -1
        while k + 1 < restart and it < maxit and status is None:
            k += 1
            it += 1
            w = op(V[:, k])
            if left_precond is not None:
                w = left_precond(w)
            norm_before = np.linalg.norm(w)
            for i in range(k + 1):
                H[i, k] = V[:, i] @ w
                w -= H[i, k] * V[:, i]
            if np.linalg.norm(w) < 0.7071 * norm_before:
                # severe cancellation: one reorthogonalization pass
                for i in range(k + 1):
                    corr = V[:, i] @ w
                    H[i, k] += corr
                    w -= corr * V[:, i]
            H[k + 1, k] = np.linalg.norm(w)
            lucky = H[k + 1, k] == 0.0
            if not lucky:
                V[:, k + 1] = w / H[k + 1, k]
            for i in range(k):
                t = givens_c[i] * H[i, k] + givens_s[i] * H[i + 1, k]
                H[i + 1, k] = -givens_s[i] * H[i, k] + givens_c[i] * H[i + 1, k]
                H[i, k] = t
            denom = np.hypot(H[k, k], H[k + 1, k])
            if denom == 0.0:
                status = BREAKDOWN
                break
            givens_c[k] = H[k, k] / denom
            givens_s[k] = H[k + 1, k] / denom
            H[k, k] = denom
            H[k + 1, k] = 0.0
            g[k + 1] = -givens_s[k] * g[k]
            g[k] = givens_c[k] * g[k]

            relres = abs(g[k + 1]) / normpb
            yk = sla.solve_triangular(H[:k + 1, :k + 1], g[:k + 1], lower=False)
            xk = x + V[:, :k + 1] @ yk
            true_relres = np.linalg.norm(b - op(xk)) / normb
            _record(history, callback, it, relres, true_relres, xk)
            if relres <= tol and true_relres <= tol:
                status = CONVERGED
            elif lucky:
                # invariant subspace reached without meeting the tolerance
                status = BREAKDOWN
        x = xk
        cycle_res = abs(g[min(k + 1, restart)]) / normpb
        full_cycle = k + 1 == restart
        if status is None and full_cycle and prev_cycle is not None \
                and cycle_res > (1.0 - _STAGNATION_FACTOR) * prev_cycle:
            status = STAGNATION
        if full_cycle:
            prev_cycle = cycle_res
    return SolveOutcome(x, status, it, history)


def cg(op, b, tol, maxit, precond=None, callback=None):
    """Conjugate gradients for SPD-restricted operators.

    On indefinite operators CG is expected to fail; a non-positive curvature
    ``p^T op p`` or ten consecutive iterations without residual decrease is
    reported as ``breakdown``.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros(op.dim)
    history = []
    normb = np.linalg.norm(b)
    if normb == 0.0:
        return SolveOutcome(x, CONVERGED, 0, history)
    r = b.copy()
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = float(r @ z)
    best = np.inf
    flat = 0
    status = MAX_ITERATIONS
    it = 0
    while it < maxit:
        it += 1
        ap = op(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            status = BREAKDOWN
            break
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        relres = np.linalg.norm(r) / normb
        true_relres = np.linalg.norm(b - op(x)) / normb
        _record(history, callback, it, relres, true_relres, x)
        if relres <= tol and true_relres <= tol:
            status = CONVERGED
            break
        if relres >= best:
            flat += 1
            if flat >= 10:
                status = BREAKDOWN
                break
        else:
            best = relres
            flat = 0
        z = precond(r) if precond is not None else r
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    return SolveOutcome(x, status, it, history)
