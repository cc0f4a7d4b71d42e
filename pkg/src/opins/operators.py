"""Light-weight linear operator contract shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

__all__ = ["LinearOperator", "aslinearoperator"]


@dataclass(frozen=True)
class LinearOperator:
    """A square 'apply to vector' map of dimension ``dim``.

    ``symmetric`` is caller-declared and trusted by the solvers; linearity is
    a contract of ``apply``, spot-checkable on random probes.
    """

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    symmetric: bool = False

    def __call__(self, v):
        return self.apply(v)


def aslinearoperator(mat, symmetric=False):
    """Wrap a dense or sparse square matrix as a LinearOperator."""
    n, m = mat.shape
    if n != m:
        raise ValueError(f"operator must be square, got {mat.shape}")
    if sp.issparse(mat):
        return LinearOperator(dim=n, apply=lambda v: mat @ v, symmetric=symmetric)
    arr = np.asarray(mat, dtype=float)
    return LinearOperator(dim=n, apply=lambda v: arr @ v, symmetric=symmetric)
