"""Experiment runner: one (problem, solver configuration) pair per call.

``run_case`` executes the requested solver, streams one CSV row per
iteration (``iter,relres_x,relres_full,norm_Bxn``) and writes a JSON report
with the final metrics.  For solvers that split x into particular and
null-space parts (the opins family, pcg, and the constraint-preconditioned
MINRES baseline) ``norm_Bxn`` is ||B x_n|| at that iteration; for
whole-system solvers (pgmres, tsvd, nullspace-oracle) it is the constraint
violation ||g - B x||.  Direct solvers emit a single summary row.

CSV content depends only on (problem, config), so identical inputs give
bit-identical files; wall time goes to the JSON report only.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .. import krylov, oracles
from ..driver import OpinsOptions, opins_solve
from ..operators import LinearOperator
from ..projection import Projector, particular_solution, recover_multipliers
from ..qrcp import qrcp_factor
from .metrics import MetricsRecord, relres_full, relres_x
from .problems import build_system

__all__ = ["RunConfig", "run_case", "SOLVER_NAMES"]

SCHEMA_VERSION = 1

SOLVER_NAMES = ("opins", "opins-j", "opins-p", "opins-ilu", "nullspace-oracle",
                "tsvd", "pminres-ir0", "pminres-ir1", "pminres-ir2", "pcg", "pgmres")

_OPINS_VARIANTS = {
    "opins": ("none", "identity"),
    "opins-j": ("simple", "jacobi"),
    "opins-p": ("projected", "jacobi"),
    "opins-ilu": ("simple", "ilu0"),
}


@dataclass
class RunConfig:
    """Solver selection plus tolerances and output paths."""

    solver: str
    tol: float = 1e-10
    qrcp_tol: float = 1e-12
    maxit: int = 0
    restart: int = 50
    precond_side: str = "auto"
    g_kind: Optional[str] = None
    history_path: Optional[str] = None
    report_path: Optional[str] = None

    def __post_init__(self):
        name = self.solver
        if name.startswith("pminres-ir(") and name.endswith(")"):
            name = "pminres-ir" + name[len("pminres-ir("):-1]
            self.solver = name
        if name not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {name!r}; choose from {SOLVER_NAMES}")
        if self.tol <= 0 or self.qrcp_tol <= 0:
            raise ValueError("tolerances must be positive")


class _HistoryWriter:
    header = "iter,relres_x,relres_full,norm_Bxn"

    def __init__(self, path):
        self.rows = []
        self.path = path

    def add(self, it, rx, rfull, bxn):
        self.rows.append(f"{it},{rx:.17g},{rfull:.17g},{bxn:.17g}")

    def flush(self):
        if self.path is None:
            return
        with open(self.path, "w") as fh:
            fh.write(self.header + "\n")
            for row in self.rows:
                fh.write(row + "\n")


def _bt_dense(system):
    b = system.b
    return b.toarray().T if sp.issparse(b) else np.asarray(b, dtype=float).T


@dataclass
class _Case:
    """Shared per-run state: system, factorization, projected right-hand side."""

    system: object
    fact: object
    projector: Projector
    x_p: np.ndarray
    lead: np.ndarray
    lead_norm: float
    writer: _HistoryWriter

    def relres_x_of(self, x_n_k):
        if self.lead_norm == 0.0:
            return 0.0
        r = self.lead - self.projector.complement(self.system.a @ x_n_k)
        return float(np.linalg.norm(r) / self.lead_norm)

    def row(self, it, x_n_k, y_k, bxn):
        self.writer.add(it, self.relres_x_of(x_n_k),
                        relres_full(self.system, self.x_p + x_n_k, y_k), bxn)


def _make_case(system, config, writer):
    fact = qrcp_factor(_bt_dense(system), config.qrcp_tol)
    projector = Projector(fact)
    x_p = particular_solution(projector, system.g)
    lead = projector.complement(system.f - system.a @ x_p)
    return _Case(system=system, fact=fact, projector=projector, x_p=x_p,
                 lead=lead, lead_norm=float(np.linalg.norm(lead)), writer=writer)


def _maxit(config, dim):
    return config.maxit if config.maxit > 0 else 10 * max(dim, 1)


def _opins_case(case, spec, config):
    system = case.system
    precond, default_g = _OPINS_VARIANTS[config.solver]

    def on_inner(it, w_k, true_relres):
        x_n_k = case.projector.complement(w_k)
        y_k = recover_multipliers(case.projector,
                                  system.f - system.a @ (case.x_p + x_n_k))
        case.row(it, x_n_k, y_k, float(np.linalg.norm(system.b @ x_n_k)))

    opts = OpinsOptions(rank_tol=config.qrcp_tol, solve_tol=config.tol,
                        maxit=config.maxit, restart=config.restart,
                        precond=precond, g_kind=config.g_kind or default_g,
                        precond_side=config.precond_side,
                        declared_singular=spec.declared_singular,
                        compute_y=True, inner_callback=on_inner)
    report = opins_solve(system, opts)
    if not report.inner.history and report.converged:
        # projected right-hand side was zero: single summary row
        case.row(0, report.x_n, report.y,
                 float(np.linalg.norm(system.b @ report.x_n)))
    return report.x, report.y, report.inner.status, report.inner.iterations


def _pminres_case(case, spec, config):
    system = case.system
    ir_steps = int(config.solver[-1])
    g_kind = config.g_kind or "identity"
    n = system.n
    if g_kind == "identity":
        g_matrix = np.eye(n)
    elif g_kind == "jacobi":
        g_matrix = np.diag(np.abs(np.asarray(system.a.diagonal(), dtype=float)))
    else:
        raise ValueError("pminres baseline supports g_kind identity or jacobi")
    rows = np.sort(case.fact.permutation[:case.fact.rank])

    def on_iter(it, z_k, relres):
        x_n_k = z_k[:n]
        y_k = np.zeros(system.m)
        y_k[rows] = z_k[n:]
        case.row(it, x_n_k, y_k, float(np.linalg.norm(system.b @ x_n_k)))

    outcome, x_p = oracles.pminres_constraint(system, g_matrix, ir_steps,
                                              config.tol, _maxit(config, n),
                                              callback=on_iter,
                                              rank_tol=config.qrcp_tol)
    x = x_p + outcome.solution[:n]
    y = np.zeros(system.m)
    y[rows] = outcome.solution[n:]
    return x, y, outcome.status, outcome.iterations


def _pcg_case(case, spec, config):
    system = case.system
    op = LinearOperator(
        dim=system.n,
        apply=lambda v: case.projector.complement(system.a @ case.projector.complement(v)),
        symmetric=True)

    def on_iter(it, w_k, relres):
        x_n_k = case.projector.complement(w_k)
        y_k = recover_multipliers(case.projector,
                                  system.f - system.a @ (case.x_p + x_n_k))
        case.row(it, x_n_k, y_k, float(np.linalg.norm(system.b @ x_n_k)))

    outcome = krylov.cg(op, case.lead, config.tol, _maxit(config, system.n),
                        callback=on_iter)
    x_n = case.projector.complement(outcome.solution)
    x = case.x_p + x_n
    y = recover_multipliers(case.projector, system.f - system.a @ x)
    return x, y, outcome.status, outcome.iterations


def _pgmres_case(case, spec, config):
    system = case.system
    n, m = system.n, system.m
    kmat = system.kkt_matrix()
    mprec = kmat.copy()
    mprec[:n, :n] = np.eye(n)
    lu = sla.lu_factor(mprec)
    prec = LinearOperator(dim=n + m, apply=lambda v: sla.lu_solve(lu, v))
    op = LinearOperator(dim=n + m, apply=lambda v: kmat @ v)

    def on_iter(it, z_k, relres):
        x_k, y_k = z_k[:n], z_k[n:]
        x_n_k = case.projector.complement(x_k - case.x_p)
        case.writer.add(it, case.relres_x_of(x_n_k), relres_full(system, x_k, y_k),
                        float(np.linalg.norm(system.g - system.b @ x_k)))

    outcome = krylov.gmres(op, system.rhs_full(), config.restart, config.tol,
                           _maxit(config, n + m), left_precond=prec,
                           callback=on_iter)
    return (outcome.solution[:n], outcome.solution[n:],
            outcome.status, outcome.iterations)


def _direct_case(case, spec, config):
    system = case.system
    if config.solver == "tsvd":
        z = oracles.tsvd_solve(system.kkt_matrix(), system.rhs_full(), config.qrcp_tol)
        x, y = z[:system.n], z[system.n:]
    else:
        x, y = oracles.explicit_nullspace_solve(system, rank_tol=config.qrcp_tol)
    x_n = case.projector.complement(x - case.x_p)
    case.writer.add(0, case.relres_x_of(x_n), relres_full(system, x, y),
                    float(np.linalg.norm(system.g - system.b @ x)))
    return x, y, "converged", 0


def run_case(spec, config):
    """Execute one solver on one problem; returns the final MetricsRecord.

    Writes the iteration-history CSV and the JSON report when paths are set
    in the config.  Solver failures are captured in the record's status.
    """
    system = build_system(spec)
    needs_symmetry = config.solver in ("pcg", "pminres-ir0", "pminres-ir1", "pminres-ir2")
    if needs_symmetry and not system.a_symmetric:
        raise ValueError(f"solver {config.solver!r} requires a symmetric system")
    writer = _HistoryWriter(config.history_path)
    case = _make_case(system, config, writer)
    started = time.perf_counter()
    if config.solver in _OPINS_VARIANTS:
        x, y, status, iterations = _opins_case(case, spec, config)
    elif config.solver.startswith("pminres-ir"):
        x, y, status, iterations = _pminres_case(case, spec, config)
    elif config.solver == "pcg":
        x, y, status, iterations = _pcg_case(case, spec, config)
    elif config.solver == "pgmres":
        x, y, status, iterations = _pgmres_case(case, spec, config)
    else:
        x, y, status, iterations = _direct_case(case, spec, config)
    elapsed = time.perf_counter() - started
    writer.flush()

    record = MetricsRecord(
        relres_x=relres_x(system, case.fact, case.x_p,
                          case.projector.complement(x - case.x_p)),
        relres_full=relres_full(system, x, y) if y is not None else None,
        constraint_residual=float(np.linalg.norm(system.g - system.b @ x)),
        norm_x=float(np.linalg.norm(x)),
        norm_y=float(np.linalg.norm(y)) if y is not None else None,
        iterations=iterations,
        wall_time=elapsed,
        status=status,
    )
    if config.report_path is not None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "problem": spec.name,
            "solver": config.solver,
            "declared_singular": spec.declared_singular,
            "rank_b": int(case.fact.rank),
            "metrics": record.as_dict(),
        }
        with open(config.report_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return record
