"""Householder QR with column pivoting for the transposed constraint matrix.

The factorization ``B^T P = Q R`` is computed on a dense n-by-m working copy
of ``B^T`` (cheap when m is small compared to n).  Q is never formed: it is
kept as the sequence of Householder reflectors, and the leading ``q`` columns
of Q -- an orthonormal basis of range(B^T) -- are applied implicitly.

Pivoting is greedy on the largest remaining column norm, with running norm
downdates that are recomputed from scratch once a downdated value has lost
half its digits; ties break toward the lowest column index.  The numerical
rank ``q`` is the largest ``k`` with ``|R_kk| > rank_tol * |R_11|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = ["RangeBasisFactorization", "qrcp_factor", "apply_q_block", "solve_r"]


@dataclass(frozen=True)
class RangeBasisFactorization:
    """QRCP of an n-by-m matrix with implicit Householder reflectors.

    ``work`` holds R in its upper triangle and the reflector vectors (scaled
    to unit leading entry) below the diagonal; ``taus`` are the reflector
    coefficients.  ``permutation[k]`` is the original column placed at
    position k.  Immutable after construction.
    """

    nrows: int
    ncols: int
    work: np.ndarray = field(repr=False)
    taus: np.ndarray = field(repr=False)
    permutation: np.ndarray
    rank: int
    tol_used: float

    @property
    def r_block(self):
        """Leading rank-by-rank upper-triangular block of R."""
        q = self.rank
        return np.triu(self.work[:q, :q])

    def r_full(self):
        """Full min(n,m)-by-m upper-trapezoidal R (for reconstruction checks)."""
        k = min(self.nrows, self.ncols)
        return np.triu(self.work[:k, :])

    def dense_q(self, ncols=None):
        """Explicitly reconstruct the leading columns of Q (test/oracle use)."""
        k = self.rank if ncols is None else ncols
        cols = np.zeros((self.nrows, k))
        for i in range(k):
            e = np.zeros(k)
            e[i] = 1.0
            cols[:, i] = _apply_reflectors(self, np.concatenate([e, np.zeros(self.nrows - k)]),
                                           nref=k, forward=False)
        return cols


def qrcp_factor(bt, rank_tol):
    """Factor the n-by-m matrix ``bt`` (= B^T) by Householder QRCP.

    Parameters
    ----------
    bt : array_like, shape (n, m)
        Dense working copy is taken; the input is not modified.
    rank_tol : float
        Relative diagonal threshold for the numerical rank (q = 0 for a zero
        matrix).

    Returns
    -------
    RangeBasisFactorization
    """
    a = np.array(bt, dtype=float)
    if a.ndim != 2:
        raise ValueError("qrcp_factor expects a 2-d matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("qrcp_factor: non-finite input entries")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    n, m = a.shape
    if n < 1 or m < 1:
        raise ValueError("qrcp_factor expects at least one row and column")
    kmax = min(n, m)
    perm = np.arange(m)
    taus = np.zeros(kmax)
    norms2 = np.einsum("ij,ij->j", a, a)
    norms2_ref = norms2.copy()
    # recompute a downdated norm once it has lost half its digits
    recompute_at = np.sqrt(np.finfo(float).eps)
    for k in range(kmax):
        j = k + int(np.argmax(norms2[k:]))
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
            norms2[[k, j]] = norms2[[j, k]]
            norms2_ref[[k, j]] = norms2_ref[[j, k]]
        x = a[k:, k]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        lead = x[0] if x[0] != 0.0 else 1.0
        v = x.copy()
        v[0] += np.copysign(normx, lead)
        tau = 2.0 / (v @ v)
        a[k:, k:] -= np.outer(tau * v, v @ a[k:, k:])
        a[k, k] = -np.copysign(normx, lead)
        a[k + 1:, k] = v[1:] / v[0]
        taus[k] = tau * v[0] ** 2
        if k + 1 < m:
            norms2[k + 1:] -= a[k, k + 1:] ** 2
            np.maximum(norms2[k + 1:], 0.0, out=norms2[k + 1:])
            stale = norms2[k + 1:] <= recompute_at * norms2_ref[k + 1:]
            for jj in (k + 1 + np.nonzero(stale)[0]):
                norms2[jj] = a[k + 1:, jj] @ a[k + 1:, jj]
                norms2_ref[jj] = norms2[jj]
    diag = np.abs(np.diagonal(a)[:kmax])
    if diag.size == 0 or diag[0] <= 0.0:
        rank = 0
    else:
        above = diag > rank_tol * diag[0]
        rank = kmax if above.all() else int(np.argmin(above))
    return RangeBasisFactorization(nrows=n, ncols=m, work=a, taus=taus,
                                   permutation=perm, rank=rank, tol_used=rank_tol)


def _apply_reflectors(fact, v, nref, forward):
    """Apply H_{nref-1}..H_0 (forward=False) or H_0..H_{nref-1} (forward=True)."""
    w = np.array(v, dtype=float)
    order = range(nref) if forward else range(nref - 1, -1, -1)
    for k in order:
        tau = fact.taus[k]
        if tau == 0.0:
            continue
        hv = np.empty(fact.nrows - k)
        hv[0] = 1.0
        hv[1:] = fact.work[k + 1:, k]
        w[k:] -= tau * hv * (hv @ w[k:])
    return w


def apply_q_block(fact, v, transpose=False):
    """Apply U (the leading-rank block of Q) or U^T through the reflectors.

    ``transpose=True`` maps a length-n vector to the length-q coordinates
    ``U^T v``; ``transpose=False`` maps length-q coordinates back to
    ``U c``.  U is never formed densely, and only the first q reflectors are
    touched either way.
    """
    v = np.asarray(v, dtype=float)
    q = fact.rank
    if transpose:
        if v.shape != (fact.nrows,):
            raise ValueError(f"apply_q_block: expected length {fact.nrows}, got {v.shape}")
        return _apply_reflectors(fact, v, nref=q, forward=True)[:q]
    if v.shape != (q,):
        raise ValueError(f"apply_q_block: expected length {q}, got {v.shape}")
    padded = np.zeros(fact.nrows)
    padded[:q] = v
    return _apply_reflectors(fact, padded, nref=q, forward=False)


def solve_r(fact, rhs, mode):
    """Triangular solve with the leading q-by-q block of R.

    ``mode='forward-transpose'`` solves R^T t = rhs by forward substitution;
    ``mode='back'`` solves R t = rhs by back substitution.  A rank-zero
    factorization yields an empty solution.
    """
    rhs = np.asarray(rhs, dtype=float)
    q = fact.rank
    if rhs.shape != (q,):
        raise ValueError(f"solve_r: expected length {q}, got {rhs.shape}")
    if q == 0:
        return np.zeros(0)
    if mode == "forward-transpose":
        return sla.solve_triangular(fact.r_block, rhs, trans="T", lower=False)
    if mode == "back":
        return sla.solve_triangular(fact.r_block, rhs, lower=False)
    raise ValueError(f"solve_r: unknown mode {mode!r}")
