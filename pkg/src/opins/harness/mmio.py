"""Matrix Market exchange-format ingestion.

Supports real/integer coordinate and array files with general, symmetric, or
skew-symmetric storage.  Symmetric storage is expanded to the full pattern
(off-diagonal entries mirrored).  Parse failures report the file and
offending line number; complex and pattern fields are rejected.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = ["MatrixMarketError", "load_matrix_market", "load_vector", "save_matrix_market"]

_SUPPORTED_FIELDS = ("real", "integer")
_SUPPORTED_SYMMETRY = ("general", "symmetric", "skew-symmetric")


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def _parse_header(path, line):
    parts = line.strip().lower().split()
    if len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
        raise MatrixMarketError(path, 1, "not a Matrix Market matrix header")
    fmt, fieldtype, symmetry = parts[2], parts[3], parts[4]
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(path, 1, f"unsupported format {fmt!r}")
    if fieldtype not in _SUPPORTED_FIELDS:
        raise MatrixMarketError(path, 1, f"unsupported field type {fieldtype!r}")
    if symmetry not in _SUPPORTED_SYMMETRY:
        raise MatrixMarketError(path, 1, f"unsupported symmetry {symmetry!r}")
    return fmt, fieldtype, symmetry


def load_matrix_market(path):
    """Read a Matrix Market file into a validated CSR matrix."""
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")
    fmt, _, symmetry = _parse_header(path, lines[0])

    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError(path, len(lines), "missing size line")
    size_lineno, size_line = body[0]
    entries = body[1:]

    tokens = size_line.split()
    if fmt == "coordinate":
        if len(tokens) != 3:
            raise MatrixMarketError(path, size_lineno, "coordinate size line needs 'rows cols nnz'")
        try:
            nrows, ncols, nnz = (int(t) for t in tokens)
        except ValueError:
            raise MatrixMarketError(path, size_lineno, f"bad size line {size_line!r}") from None
        if len(entries) != nnz:
            raise MatrixMarketError(path, size_lineno,
                                    f"header promises {nnz} entries, file has {len(entries)}")
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=float)
        for k, (lineno, ln) in enumerate(entries):
            parts = ln.split()
            if len(parts) != 3:
                raise MatrixMarketError(path, lineno, f"expected 'row col value', got {ln!r}")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise MatrixMarketError(path, lineno, f"bad entry {ln!r}") from None
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixMarketError(path, lineno, f"index ({i},{j}) out of bounds")
            if not np.isfinite(v):
                raise MatrixMarketError(path, lineno, "non-finite value")
            rows[k], cols[k], vals[k] = i - 1, j - 1, v
        if symmetry in ("symmetric", "skew-symmetric"):
            off = rows != cols
            sign = -1.0 if symmetry == "skew-symmetric" else 1.0
            rows, cols, vals = (np.concatenate([rows, cols[off]]),
                                np.concatenate([cols, rows[off]]),
                                np.concatenate([vals, sign * vals[off]]))
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        return mat

    # array format: dense column-major values
    if len(tokens) != 2:
        raise MatrixMarketError(path, size_lineno, "array size line needs 'rows cols'")
    try:
        nrows, ncols = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise MatrixMarketError(path, size_lineno, f"bad size line {size_line!r}") from None
    if symmetry == "general":
        expected = nrows * ncols
    else:
        if nrows != ncols:
            raise MatrixMarketError(path, size_lineno, "symmetric array file must be square")
        # skew-symmetric array storage omits the (zero) diagonal
        expected = nrows * (nrows + 1) // 2 if symmetry == "symmetric" \
            else nrows * (nrows - 1) // 2
    if len(entries) != expected:
        raise MatrixMarketError(path, size_lineno,
                                f"expected {expected} values, file has {len(entries)}")
    vals = np.empty(expected)
    for k, (lineno, ln) in enumerate(entries):
        try:
            vals[k] = float(ln.split()[0])
        except (ValueError, IndexError):
            raise MatrixMarketError(path, lineno, f"bad value {ln!r}") from None
        if not np.isfinite(vals[k]):
            raise MatrixMarketError(path, lineno, "non-finite value")
    dense = np.zeros((nrows, ncols))
    if symmetry == "general":
        dense[:] = vals.reshape((ncols, nrows)).T
    else:
        k = 0
        sign = -1.0 if symmetry == "skew-symmetric" else 1.0
        start_offset = 0 if symmetry == "symmetric" else 1
        for j in range(ncols):
            for i in range(j + start_offset, nrows):
                dense[i, j] = vals[k]
                if i != j:
                    dense[j, i] = sign * vals[k]
                k += 1
    return sp.csr_matrix(dense)


def load_vector(path):
    """Read a vector (n-by-1 or 1-by-n Matrix Market file) as a 1-d array."""
    mat = load_matrix_market(path)
    nrows, ncols = mat.shape
    if 1 not in (nrows, ncols):
        raise MatrixMarketError(path, 1, f"expected a vector, got shape {mat.shape}")
    return np.asarray(mat.todense()).ravel()


def save_matrix_market(path, mat, comment=None):
    """Write a matrix or vector in coordinate (sparse) or array (dense) format."""
    with open(path, "w") as fh:
        if sp.issparse(mat):
            coo = mat.tocoo()
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
        else:
            arr = np.atleast_2d(np.asarray(mat, dtype=float))
            if arr.shape[0] == 1 and arr.shape[1] > 1:
                arr = arr.T
            fh.write("%%MatrixMarket matrix array real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
            for j in range(arr.shape[1]):
                for i in range(arr.shape[0]):
                    fh.write(f"{arr[i, j]:.17g}\n")
