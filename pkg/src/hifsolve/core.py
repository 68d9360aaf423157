"""Sparse matrix primitives, Matrix Market I/O, and singular test-matrix generators.

Matrices are stored in compressed sparse row (CSR) form with 0-based indices.
Dense vectors are plain 1-D ``numpy.float64`` arrays and permutations are 1-D
``numpy.int64`` arrays ``image`` read in gather convention:
``permuted[k] = original[image[k]]``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SparseMatrix",
    "spmv",
    "spmv_t",
    "read_matrix_market",
    "write_matrix_market",
    "write_dense_matrix_market",
    "read_dense_matrix_market",
    "gen_neumann",
    "gen_advection_diffusion",
    "norm1",
    "norminf",
    "vec_norm1",
    "vec_norm2",
]


@dataclass(frozen=True)
class SparseMatrix:
    """A real n_rows-by-n_cols matrix in CSR form.

    Invariants checked on construction: row offsets are nondecreasing and span
    ``[0, nnz]``, column indices lie in ``[0, n_cols)`` and are strictly
    increasing within each row, and all values are finite.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        offs = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        idx = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("negative dimension")
        if offs.shape != (self.n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if offs[0] != 0 or offs[-1] != idx.shape[0] or idx.shape != val.shape:
            raise ValueError("inconsistent CSR arrays")
        if np.any(np.diff(offs) < 0):
            raise ValueError("row offsets must be nondecreasing")
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.n_cols:
                raise ValueError("column index out of range")
            # strictly increasing within each row
            interior = np.diff(idx) <= 0
            row_starts = np.zeros(idx.size - 1, dtype=bool)
            starts = offs[1:-1]
            row_starts[starts[(starts > 0) & (starts < idx.size)] - 1] = True
            if np.any(interior & ~row_starts):
                raise ValueError("column indices must be strictly increasing per row")
            if not np.all(np.isfinite(val)):
                raise ValueError("matrix values must be finite")
        for arr in (offs, idx, val):
            arr.setflags(write=False)
        object.__setattr__(self, "row_offsets", offs)
        object.__setattr__(self, "col_indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def nnz(self) -> int:
        return int(self.col_indices.shape[0])

    @staticmethod
    def from_coo(n_rows, n_cols, rows, cols, vals) -> "SparseMatrix":
        """Build from triplets; duplicate (i, j) entries are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size:
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            keep = np.empty(rows.size, dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(keep) - 1
            summed = np.zeros(int(group[-1]) + 1)
            np.add.at(summed, group, vals)
            rows, cols, vals = rows[keep], cols[keep], summed
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(offsets, rows + 1, 1)
        np.cumsum(offsets, out=offsets)
        return SparseMatrix(n_rows, n_cols, offsets, cols, vals)

    @staticmethod
    def from_dense(M) -> "SparseMatrix":
        M = np.asarray(M, dtype=np.float64)
        rows, cols = np.nonzero(M)
        return SparseMatrix.from_coo(M.shape[0], M.shape[1], rows, cols, M[rows, cols])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        out[rows, self.col_indices] = self.values
        return out

    def row_ids(self) -> np.ndarray:
        """Row index of each stored entry, aligned with col_indices/values."""
        return np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(self.row_offsets))


def spmv(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Return A @ x by row-wise accumulation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n_cols,):
        raise ValueError(f"dimension mismatch: matrix has {A.n_cols} columns, vector has {x.shape}")
    if A.nnz == 0:
        return np.zeros(A.n_rows)
    return np.bincount(A.row_ids(), weights=A.values * x[A.col_indices], minlength=A.n_rows)


def spmv_t(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Return A.T @ x without forming the transpose."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n_rows,):
        raise ValueError(f"dimension mismatch: matrix has {A.n_rows} rows, vector has {x.shape}")
    if A.nnz == 0:
        return np.zeros(A.n_cols)
    return np.bincount(A.col_indices, weights=A.values * x[A.row_ids()], minlength=A.n_cols)


def norm1(A: SparseMatrix) -> float:
    """Induced 1-norm: maximum absolute column sum."""
    if A.nnz == 0:
        return 0.0
    return float(np.bincount(A.col_indices, weights=np.abs(A.values), minlength=A.n_cols).max())


def norminf(A: SparseMatrix) -> float:
    """Induced infinity norm: maximum absolute row sum (equals norm1 of A.T)."""
    if A.nnz == 0:
        return 0.0
    return float(np.bincount(A.row_ids(), weights=np.abs(A.values), minlength=A.n_rows).max())


def vec_norm1(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x)))


def vec_norm2(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(x))))


# ---------------------------------------------------------------------------
# Matrix Market I/O (coordinate format, real, general or symmetric)
# ---------------------------------------------------------------------------


class MatrixMarketError(ValueError):
    pass


def read_matrix_market(stream) -> SparseMatrix:
    """Parse a Matrix Market coordinate file (real, general/symmetric).

    Duplicate entries are summed, symmetric storage is expanded to both
    triangles, and the on-disk 1-based indices are converted to 0-based.
    Array and complex files are rejected.
    """
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str) else stream.decode())
    header = stream.readline()
    parts = header.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket" or parts[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed Matrix Market header: {header!r}")
    layout, field, symmetry = (p.lower() for p in parts[2:5])
    if layout != "coordinate":
        raise MatrixMarketError(f"unsupported layout {layout!r}: only coordinate is accepted")
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"unsupported field {field!r}: only real values are accepted")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}")
    line = stream.readline()
    while line and line.lstrip().startswith("%"):
        line = stream.readline()
    try:
        n_rows, n_cols, nnz = (int(t) for t in line.split())
    except Exception as exc:
        raise MatrixMarketError(f"malformed size line: {line!r}") from exc
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for line in stream:
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        if k >= nnz:
            raise MatrixMarketError("more entries than declared")
        toks = line.split()
        if len(toks) != 3:
            raise MatrixMarketError(f"malformed entry line: {line!r}")
        i, j = int(toks[0]), int(toks[1])
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError(f"index out of range in entry: {line!r}")
        rows[k], cols[k] = i - 1, j - 1
        try:
            vals[k] = float(toks[2])
        except ValueError as exc:
            raise MatrixMarketError(f"non-real value in entry: {line!r}") from exc
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {k}")
    if symmetry == "symmetric":
        if n_rows != n_cols:
            raise MatrixMarketError("symmetric matrix must be square")
        off = rows != cols
        rows, cols = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
        )
        vals = np.concatenate([vals, vals[off]])
    return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)


def write_matrix_market(A: SparseMatrix, stream) -> None:
    """Write coordinate-format Matrix Market (real, general, 1-based)."""
    stream.write("%%MatrixMarket matrix coordinate real general\n")
    stream.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
    rows = A.row_ids()
    for i, j, v in zip(rows, A.col_indices, A.values):
        stream.write(f"{i + 1} {j + 1} {v!r}\n")


def write_dense_matrix_market(M: np.ndarray, stream) -> None:
    """Write a dense vector or matrix in Matrix Market array format."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    stream.write("%%MatrixMarket matrix array real general\n")
    stream.write(f"{M.shape[0]} {M.shape[1]}\n")
    for j in range(M.shape[1]):
        for i in range(M.shape[0]):
            stream.write(f"{M[i, j]!r}\n")


def read_dense_matrix_market(stream) -> np.ndarray:
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str) else stream.decode())
    header = stream.readline().strip().split()
    if len(header) != 5 or header[2].lower() != "array" or header[3].lower() != "real":
        raise MatrixMarketError(f"not a real array file: {header!r}")
    line = stream.readline()
    while line.lstrip().startswith("%"):
        line = stream.readline()
    n_rows, n_cols = (int(t) for t in line.split())
    data = np.array([float(t) for t in stream.read().split()])
    if data.size != n_rows * n_cols:
        raise MatrixMarketError("array entry count mismatch")
    return data.reshape((n_cols, n_rows)).T


# ---------------------------------------------------------------------------
# Singular test-matrix generators
# ---------------------------------------------------------------------------


def _second_difference_entries(n: int, pos: np.ndarray, stride: int):
    """Triplets of the folded 1-D second difference along one grid axis.

    The missing ghost neighbor at each end contributes its -1 coefficient to
    the mirrored interior neighbor, so every row sums to zero exactly and the
    matrix is nonsymmetric. A singleton axis contributes nothing.
    """
    if n < 2:
        return [], [], []
    n_nodes = pos.shape[0]
    node = np.arange(n_nodes, dtype=np.int64)
    rows, cols, vals = [node], [node], [np.full(n_nodes, 2.0)]
    has_left = pos > 0
    has_right = pos < n - 1
    left_coeff = np.where(pos == n - 1, -2.0, -1.0)
    right_coeff = np.where(pos == 0, -2.0, -1.0)
    rows.append(node[has_left])
    cols.append(node[has_left] - stride)
    vals.append(left_coeff[has_left])
    rows.append(node[has_right])
    cols.append(node[has_right] + stride)
    vals.append(right_coeff[has_right])
    return rows, cols, vals


def gen_neumann(nx: int, ny: int) -> SparseMatrix:
    """Finite-difference Laplacian on an nx-by-ny grid with Neumann folding.

    Ghost-point reflection folds each missing neighbor's -1 coefficient onto
    the mirrored interior neighbor, which makes the matrix nonsymmetric with
    exact zero row sums: the right null space is span{1}.
    """
    if nx < 1 or ny < 1:
        raise ValueError("grid dimensions must be positive")
    n = nx * ny
    rows, cols, vals = [], [], []
    for r, c, v in zip(*_second_difference_entries(nx, ny, 1, n)):
        rows.append(r), cols.append(c), vals.append(v)
    for r, c, v in zip(*_second_difference_entries(ny, nx, nx, n)):
        rows.append(r), cols.append(c), vals.append(v)
    if not rows:
        return SparseMatrix(n, n, np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0))
    return SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def gen_advection_diffusion(nx: int, ny: int, velocity) -> SparseMatrix:
    """Advection-diffusion operator: folded Laplacian plus first-order upwinding.

    Upwind differences at a boundary where the upstream neighbor is missing
    contribute nothing (the reflected difference vanishes), so row sums stay
    exactly zero and 1 remains the right null vector. The advection term
    makes the operator range asymmetric for nonzero velocity.
    """
    if nx < 2 or ny < 2:
        raise ValueError("grid dimensions must be at least 2")
    vx, vy = float(velocity[0]), float(velocity[1])
    base = gen_neumann(nx, ny)
    n = nx * ny
    node = np.arange(n, dtype=np.int64)
    ix = node % nx
    iy = node // nx
    rows = [base.row_ids()]
    cols = [base.col_indices.copy()]
    vals = [base.values.copy()]

    def upwind(v, pos, limit, stride):
        if v == 0.0:
            return
        if v > 0.0:
            mask = pos > 0
            nbr = node[mask] - stride
        else:
            mask = pos < limit - 1
            nbr = node[mask] + stride
        rows.append(node[mask])
        cols.append(node[mask])
        vals.append(np.full(mask.sum(), abs(v)))
        rows.append(node[mask])
        cols.append(nbr)
        vals.append(np.full(mask.sum(), -abs(v)))

    upwind(vx, ix, nx, 1)
    upwind(vy, iy, ny, nx)
    return SparseMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
