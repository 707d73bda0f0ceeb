"""Dense exact linear algebra over Q(i).

Everything downstream (connection solves, projections, cohomology ranks,
spectral pages) reduces to the handful of primitives in this module.  The
elimination uses first-nonzero pivoting in column order so results are
deterministic and reproducible.

Right-hand sides may live in any module over Q(i) (e.g. vectors of
polynomials): elimination only ever multiplies RHS entries by Scalars.
"""

from __future__ import annotations

from typing import List, Sequence

from .errors import DegenerateGram, InconsistentSystem, NonUniqueSolution
from .scalars import ONE, ZERO, Scalar, as_scalar


class ExactMatrix:
    """Dense matrix over Q(i), row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data=None):
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [[ZERO] * cols for _ in range(rows)]
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ValueError("data shape does not match (rows, cols)")
            self.data = [[as_scalar(x) for x in r] for r in data]

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        m = cls(n, n)
        for i in range(n):
            m.data[i][i] = ONE
        return m

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "ExactMatrix":
        rows = list(rows)
        if not rows:
            return cls(0, 0)
        return cls(len(rows), len(rows[0]), rows)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "ExactMatrix":
        cols = list(cols)
        if not cols:
            return cls(0, 0)
        n = len(cols[0])
        m = cls(n, len(cols))
        for j, c in enumerate(cols):
            if len(c) != n:
                raise ValueError("ragged columns")
            for i in range(n):
                m.data[i][j] = as_scalar(c[i])
        return m

    def column(self, j: int) -> List[Scalar]:
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self) -> List[List[Scalar]]:
        return [self.column(j) for j in range(self.cols)]

    def copy(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, [row[:] for row in self.data])

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.data == other.data

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        out = ExactMatrix(self.rows, other.cols)
        for i in range(self.rows):
            row = self.data[i]
            for j in range(other.cols):
                acc = ZERO
                for k in range(self.cols):
                    a = row[k]
                    if a:
                        b = other.data[k][j]
                        if b:
                            acc = acc + a * b
                out.data[i][j] = acc
        return out

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in matrix sum")
        return ExactMatrix(
            self.rows, self.cols,
            [[self.data[i][j] + other.data[i][j] for j in range(self.cols)] for i in range(self.rows)],
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in matrix difference")
        return ExactMatrix(
            self.rows, self.cols,
            [[self.data[i][j] - other.data[i][j] for j in range(self.cols)] for i in range(self.rows)],
        )

    def scale(self, c) -> "ExactMatrix":
        c = as_scalar(c)
        return ExactMatrix(self.rows, self.cols, [[c * x for x in row] for row in self.data])

    def apply(self, v: Sequence[Scalar]) -> List[Scalar]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            acc = ZERO
            row = self.data[i]
            for k in range(self.cols):
                if row[k] and v[k]:
                    acc = acc + row[k] * v[k]
            out.append(acc)
        return out

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, [list(col) for col in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)])

    def conj(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, [[x.conj() for x in row] for row in self.data])

    def conj_transpose(self) -> "ExactMatrix":
        return self.transpose().conj()

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.data for x in row)

    def is_hermitian(self) -> bool:
        if self.rows != self.cols:
            return False
        return all(self.data[i][j] == self.data[j][i].conj() for i in range(self.rows) for j in range(self.rows))

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"


def _echelonize(data: List[List[Scalar]], rhs: List[list] | None):
    """In-place forward elimination; returns pivot column list.

    ``rhs`` is a list of module-valued rows manipulated in lockstep (entries
    only need +, - and Scalar multiplication).
    """
    if not data:
        return []
    nrows, ncols = len(data), len(data[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if data[i][c]:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            data[r], data[pr] = data[pr], data[r]
            if rhs is not None:
                rhs[r], rhs[pr] = rhs[pr], rhs[r]
        piv = data[r][c]
        for i in range(r + 1, nrows):
            f = data[i][c]
            if f:
                ratio = f / piv
                row_i, row_r = data[i], data[r]
                for j in range(c, ncols):
                    if row_r[j]:
                        row_i[j] = row_i[j] - ratio * row_r[j]
                if rhs is not None:
                    rhs[i] = rhs[i] - ratio * rhs[r]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rank(A: ExactMatrix) -> int:
    data = [row[:] for row in A.data]
    return len(_echelonize(data, None))


def kernel_basis(A: ExactMatrix) -> List[List[Scalar]]:
    """Basis of ker(A); one vector per free column, in increasing column order."""
    data = [row[:] for row in A.data]
    pivots = _echelonize(data, None)
    pivset = set(pivots)
    free = [c for c in range(A.cols) if c not in pivset]
    basis = []
    for fc in free:
        v = [ZERO] * A.cols
        v[fc] = ONE
        # back-substitute pivot coordinates, bottom-up
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            acc = ZERO
            row = data[r]
            for j in range(c + 1, A.cols):
                if row[j] and v[j]:
                    acc = acc + row[j] * v[j]
            v[c] = -acc / row[c]
        basis.append(v)
    return basis


class _ModuleRow:
    """Wraps one RHS entry so _echelonize can treat matrix and module RHS alike."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __sub__(self, other):
        return _ModuleRow(self.value - other.value)

    def __rmul__(self, c):
        return _ModuleRow(c * self.value)


def solve(A: ExactMatrix, b: Sequence, unique: bool = False):
    """Some x with Ax = b, or raise InconsistentSystem.

    Entries of ``b`` may be Scalars or elements of any module over Q(i); the
    result has matching entries.  With unique=True a nonzero kernel raises
    NonUniqueSolution.  The returned solution sets all free coordinates to
    zero (zero meaning the Scalar zero; module-valued solutions scale it).
    """
    if len(b) != A.rows:
        raise ValueError("rhs length mismatch")
    if unique and kernel_basis(A):
        raise NonUniqueSolution(f"system has a {A.cols - rank(A)}-dimensional kernel")
    data = [row[:] for row in A.data]
    rhs = [_ModuleRow(x) for x in b]
    pivots = _echelonize(data, rhs)
    nr = len(pivots)
    for i in range(nr, A.rows):
        v = rhs[i].value
        nonzero = bool(v) if isinstance(v, Scalar) else not _module_is_zero(v)
        if nonzero:
            raise InconsistentSystem("rhs is not in the image")
    zero = _module_zero_like(b, A)
    x = [zero] * A.cols
    for r in range(nr - 1, -1, -1):
        c = pivots[r]
        acc = rhs[r].value
        row = data[r]
        for j in range(c + 1, A.cols):
            if row[j]:
                acc = acc - row[j] * x[j]
        x[c] = (ONE / row[c]) * acc
    return x


def _module_is_zero(v) -> bool:
    probe = getattr(v, "is_zero", None)
    if probe is not None:
        return probe()
    return not v


def _module_zero_like(b, A):
    for x in b:
        if isinstance(x, Scalar):
            return ZERO
        return 0 * x
    return ZERO


def inverse(A: ExactMatrix) -> ExactMatrix:
    if A.rows != A.cols:
        raise ValueError("inverse of a non-square matrix")
    cols = []
    eye = ExactMatrix.identity(A.rows)
    for j in range(A.rows):
        cols.append(solve(A, eye.column(j), unique=True))
    return ExactMatrix.from_columns(cols)


def hermitian_inner(u: Sequence[Scalar], v: Sequence[Scalar], gram: ExactMatrix) -> Scalar:
    """<u, v> = v* G u for the hermitian form G."""
    # <u, v> = sum_{i,j} G[i][j] u_i conj(v_j) with G[i][j] = <e_i, e_j>
    acc = ZERO
    for i in range(gram.rows):
        if not u[i]:
            continue
        for j in range(gram.cols):
            g = gram.data[i][j]
            if g and v[j]:
                acc = acc + g * u[i] * v[j].conj()
    return acc


def gram_orthogonal_projection(basis: Sequence[Sequence[Scalar]], gram: ExactMatrix) -> ExactMatrix:
    """Matrix of the G-orthogonal projection onto span(basis).

    P = V (V* G V)^{-1} V* G, where V has the basis vectors as columns.
    Raises DegenerateGram when the restricted Gram matrix is singular.
    """
    n = gram.rows
    if not basis:
        return ExactMatrix(n, n)
    V = ExactMatrix.from_columns(basis)
    Vstar = V.conj_transpose()
    small = Vstar @ gram @ V
    if rank(small) < small.rows:
        raise DegenerateGram("restricted Gram matrix is singular")
    return V @ inverse(small) @ Vstar @ gram


def is_hermitian_psd(A: ExactMatrix) -> bool:
    """Exact positive-semidefiniteness test for a hermitian matrix.

    Recursive elimination: a zero diagonal entry forces a zero row/column,
    a negative one fails, a positive one eliminates via its Schur complement.
    """
    if not A.is_hermitian():
        return False
    data = [row[:] for row in A.data]
    n = A.rows
    active = list(range(n))
    while active:
        k = active[0]
        d = data[k][k]
        if d.im != 0:
            return False
        if d.re < 0:
            return False
        if d.re == 0:
            if any(data[k][j] or data[j][k] for j in active):
                return False
            active.pop(0)
            continue
        for i in active[1:]:
            f = data[i][k] / d
            if f:
                for j in active:
                    data[i][j] = data[i][j] - f * data[k][j]
        active.pop(0)
    return True


def column_span_rank(vectors: Sequence[Sequence[Scalar]]) -> int:
    if not vectors:
        return 0
    return rank(ExactMatrix.from_columns(vectors))


def independent_subset(vectors: Sequence[Sequence[Scalar]]) -> List[int]:
    """Indices of a greedy maximal independent subset, in input order."""
    chosen: List[int] = []
    current = 0
    for idx in range(len(vectors)):
        cand = [vectors[i] for i in chosen] + [vectors[idx]]
        r = column_span_rank(cand)
        if r > current:
            chosen.append(idx)
            current = r
    return chosen


def in_span(vectors: Sequence[Sequence[Scalar]], v: Sequence[Scalar]) -> bool:
    if all(not x for x in v):
        return True
    if not vectors:
        return False
    A = ExactMatrix.from_columns(vectors)
    try:
        solve(A, list(v))
        return True
    except InconsistentSystem:
        return False
