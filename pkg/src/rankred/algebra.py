"""Dense exact matrices and tensors over a :class:`~rankred.fields.Field`.

Everything here is an immutable value. Ranks are computed by Gaussian
elimination with the pivot taken as the first nonzero entry in row-major
order, which also fixes the output of :func:`rank_one_decompose`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterable, List, Sequence, Tuple

from .fields import Field, Scalar

Vector = Tuple[Scalar, ...]


def _vec(field: Field, v: Iterable) -> Vector:
    return tuple(field(x) for x in v)


def unit_vector(field: Field, n: int, i: int) -> Vector:
    """``e_i`` of length ``n`` (0-based ``i``)."""
    return tuple(field.one if k == i else field.zero for k in range(n))


def vec_is_zero(v: Sequence[Scalar]) -> bool:
    return all(x == 0 for x in v)


def vec_add(field: Field, u: Sequence, v: Sequence) -> Vector:
    return tuple(field.add(a, b) for a, b in zip(u, v))


def vec_sub(field: Field, u: Sequence, v: Sequence) -> Vector:
    return tuple(field.sub(a, b) for a, b in zip(u, v))


def vec_scale(field: Field, c: Scalar, v: Sequence) -> Vector:
    return tuple(field.mul(c, a) for a in v)


@dataclass(frozen=True)
class Matrix:
    field: Field
    rows: int
    cols: int
    entries: Tuple[Scalar, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} "
                f"entries, got {len(self.entries)}"
            )

    # construction

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence]) -> "Matrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if n else 0
        if any(len(r) != m for r in rows):
            raise ValueError("ragged matrix rows")
        return cls(field, n, m, tuple(field(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, field: Field, n: int, m: int) -> "Matrix":
        return cls(field, n, m, (field.zero,) * (n * m))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        return cls(field, n, n, tuple(
            field.one if i == j else field.zero for i in range(n) for j in range(n)))

    @classmethod
    def outer(cls, field: Field, v: Sequence, w: Sequence) -> "Matrix":
        v, w = _vec(field, v), _vec(field, w)
        return cls(field, len(v), len(w), tuple(field.mul(a, b) for a in v for b in w))

    @classmethod
    def unit(cls, field: Field, n: int, m: int, i: int, j: int, value=None) -> "Matrix":
        """Matrix with a single nonzero entry at ``(i, j)`` (0-based)."""
        e = [field.zero] * (n * m)
        e[i * m + j] = field.one if value is None else field(value)
        return cls(field, n, m, tuple(e))

    # access

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: Tuple[int, int]) -> Scalar:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return self.entries[j::self.cols] if self.cols else ()

    def tolist(self) -> List[List[Scalar]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def __repr__(self) -> str:
        return f"Matrix({self.field!r}, {self.tolist()!r})"

    # algebra

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, self.cols, self.rows, tuple(
            self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)))

    def _check(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        if self.field != other.field:
            raise ValueError(f"field mismatch {self.field!r} vs {other.field!r}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(map(f.add, self.entries, other.entries)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(map(f.sub, self.entries, other.entries)))

    def __neg__(self) -> "Matrix":
        return Matrix(self.field, self.rows, self.cols, tuple(map(self.field.neg, self.entries)))

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        return Matrix(self.field, self.rows, self.cols, vec_scale(self.field, c, self.entries))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        f = self.field
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                acc = f.zero
                for k in range(self.cols):
                    if r[k] != 0:
                        acc = f.add(acc, f.mul(r[k], other.entries[k * other.cols + j]))
                out.append(acc)
        return Matrix(f, self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return vec_is_zero(self.entries)

    def nonzero_rows(self) -> List[int]:
        return [i for i in range(self.rows) if not vec_is_zero(self.row(i))]

    def nonzero_cols(self) -> List[int]:
        return [j for j in range(self.cols) if not vec_is_zero(self.col(j))]

    def nonzero_positions(self) -> List[Tuple[int, int]]:
        m = self.cols
        return [divmod(k, m) for k, x in enumerate(self.entries) if x != 0]

    def padded(self, n: int, m: int) -> "Matrix":
        """Zero-pad on the bottom and right to ``n x m``."""
        if n < self.rows or m < self.cols:
            raise ValueError("cannot pad to a smaller shape")
        z = self.field.zero
        e = []
        for i in range(n):
            if i < self.rows:
                e.extend(self.row(i))
                e.extend([z] * (m - self.cols))
            else:
                e.extend([z] * m)
        return Matrix(self.field, n, m, tuple(e))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix(self.field, len(rows), len(cols),
                      tuple(self[i, j] for i in rows for j in cols))

    def rank(self) -> int:
        return rank(self)


def block_diag(field: Field, *blocks: Matrix) -> Matrix:
    n = sum(b.rows for b in blocks)
    m = sum(b.cols for b in blocks)
    e = [field.zero] * (n * m)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                e[(r0 + i) * m + c0 + j] = b[i, j]
        r0 += b.rows
        c0 += b.cols
    return Matrix(field, n, m, tuple(e))


def hstack(*mats: Matrix) -> Matrix:
    n = mats[0].rows
    if any(x.rows != n for x in mats):
        raise ValueError("row counts differ")
    e = []
    for i in range(n):
        for x in mats:
            e.extend(x.row(i))
    return Matrix(mats[0].field, n, sum(x.cols for x in mats), tuple(e))


def vstack(*mats: Matrix) -> Matrix:
    m = mats[0].cols
    if any(x.cols != m for x in mats):
        raise ValueError("column counts differ")
    return Matrix(mats[0].field, sum(x.rows for x in mats), m,
                  tuple(itertools.chain.from_iterable(x.entries for x in mats)))


def _row_reduce(field: Field, rows: List[List[Scalar]], ncols: int) -> int:
    """In-place forward elimination; returns the rank."""
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.inv(rows[r][c])
        pr = rows[r] = [field.mul(inv, x) for x in rows[r]]
        for i in range(r + 1, nrows):
            f = rows[i][c]
            if f != 0:
                ri = rows[i]
                rows[i] = [field.sub(a, field.mul(f, b)) for a, b in zip(ri, pr)]
        r += 1
        if r == nrows:
            break
    return r


def rank(M: Matrix) -> int:
    """Exact rank of ``M`` over its field."""
    if M.rows == 0 or M.cols == 0:
        return 0
    if M.cols > M.rows:
        M = M.T
    rows = [list(M.row(i)) for i in range(M.rows)]
    return _row_reduce(M.field, rows, M.cols)


def rank_one_decompose(B: Matrix) -> List[Tuple[Vector, Vector]]:
    """Write ``B`` as a sum of ``rank(B)`` outer products ``v w^t``.

    Each step takes the first nonzero entry ``B[i, j] = c`` in row-major order,
    emits ``v = B[:, j]`` and ``w = B[i, :] / c`` and subtracts ``v w^t``; this
    zeroes row ``i`` and column ``j`` and lowers the rank by exactly one.
    """
    f = B.field
    out = []
    while True:
        pos = next((k for k, x in enumerate(B.entries) if x != 0), None)
        if pos is None:
            return out
        i, j = divmod(pos, B.cols)
        c_inv = f.inv(B.entries[pos])
        v = B.col(j)
        w = vec_scale(f, c_inv, B.row(i))
        out.append((v, w))
        B = B - Matrix.outer(f, v, w)


def in_span(field: Field, vectors: Sequence[Sequence], v: Sequence) -> bool:
    if not vectors:
        return vec_is_zero(v)
    base = _row_reduce(field, [list(x) for x in vectors], len(v))
    return _row_reduce(field, [list(x) for x in vectors] + [list(v)], len(v)) == base


def solve(field: Field, M: Matrix, b: Sequence) -> Vector:
    """Solve ``M x = b`` for square invertible ``M``."""
    n = M.rows
    if M.cols != n or len(b) != n:
        raise ValueError("solve needs a square system")
    aug = [list(M.row(i)) + [field(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = field.inv(aug[c][c])
        aug[c] = [field.mul(inv, x) for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [field.sub(a, field.mul(f, p)) for a, p in zip(aug[i], aug[c])]
    return tuple(aug[i][n] for i in range(n))


# tensors


def _strides(shape: Sequence[int]) -> Tuple[int, ...]:
    out = []
    s = 1
    for n in reversed(shape):
        out.append(s)
        s *= n
    return tuple(reversed(out))


@dataclass(frozen=True)
class Tensor:
    """Dense tensor, row-major with the last index fastest.

    Order-1 tensors are allowed as slices of matrices; reduction inputs are
    always of order at least 2.
    """

    field: Field
    shape: Tuple[int, ...]
    entries: Tuple[Scalar, ...]

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        if len(self.shape) < 1:
            raise ValueError("tensor order must be at least 1")
        if any(n < 1 for n in self.shape):
            raise ValueError(f"bad shape {self.shape}")
        if len(self.entries) != prod(self.shape):
            raise ValueError(f"shape {self.shape} needs {prod(self.shape)} entries")

    @classmethod
    def zeros(cls, field: Field, shape: Sequence[int]) -> "Tensor":
        return cls(field, tuple(shape), (field.zero,) * prod(shape))

    @classmethod
    def from_entries(cls, field: Field, shape: Sequence[int], entries: Iterable) -> "Tensor":
        return cls(field, tuple(shape), tuple(field(x) for x in entries))

    @classmethod
    def from_matrix(cls, M: Matrix) -> "Tensor":
        return cls(M.field, (M.rows, M.cols), M.entries)

    @classmethod
    def outer(cls, field: Field, *factors: Sequence) -> "Tensor":
        vs = [_vec(field, v) for v in factors]
        entries = []
        for combo in itertools.product(*vs):
            acc = field.one
            for x in combo:
                acc = field.mul(acc, x)
            entries.append(acc)
        return cls(field, tuple(len(v) for v in vs), tuple(entries))

    @property
    def order(self) -> int:
        return len(self.shape)

    def index(self, idx: Sequence[int]) -> int:
        return sum(i * s for i, s in zip(idx, _strides(self.shape)))

    def __getitem__(self, idx: Sequence[int]) -> Scalar:
        return self.entries[self.index(idx)]

    def _check(self, other: "Tensor") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        if self.field != other.field:
            raise ValueError("field mismatch")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.field, self.shape, vec_add(self.field, self.entries, other.entries))

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.field, self.shape, vec_sub(self.field, self.entries, other.entries))

    def scale(self, c) -> "Tensor":
        return Tensor(self.field, self.shape, vec_scale(self.field, self.field(c), self.entries))

    def is_zero(self) -> bool:
        return vec_is_zero(self.entries)

    def to_matrix(self) -> Matrix:
        if self.order != 2:
            raise ValueError("only order-2 tensors are matrices")
        return Matrix(self.field, self.shape[0], self.shape[1], self.entries)

    def unfolding(self, mode: int) -> Matrix:
        """Mode-``mode`` flattening: rows indexed by that mode."""
        n = self.shape[mode]
        rest = [s for k, s in enumerate(self.shape) if k != mode]
        rows = []
        for i in range(n):
            row = []
            for other in itertools.product(*(range(s) for s in rest)):
                idx = list(other)
                idx.insert(mode, i)
                row.append(self[idx])
            rows.append(row)
        return Matrix(self.field, n, prod(rest), tuple(x for r in rows for x in r))

    def is_pure(self) -> bool:
        """True iff the tensor has rank at most one."""
        if self.order == 1:
            return True
        return all(rank(self.unfolding(k)) <= 1 for k in range(self.order))


@dataclass(frozen=True)
class PureTensor:
    """Outer product ``factors[0] ⊗ ... ⊗ factors[d-1]``."""

    field: Field
    factors: Tuple[Vector, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(v) for v in self.factors))

    @classmethod
    def of(cls, field: Field, *factors: Sequence) -> "PureTensor":
        return cls(field, tuple(_vec(field, v) for v in factors))

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.factors)

    def dense(self) -> Tensor:
        return Tensor.outer(self.field, *self.factors)

    def is_zero(self) -> bool:
        return any(vec_is_zero(v) for v in self.factors)


def pure_from_tensor(T: Tensor) -> PureTensor:
    """Factor a tensor of rank at most one (zero maps to all-zero factors)."""
    f = T.field
    if T.is_zero():
        return PureTensor(f, tuple((f.zero,) * n for n in T.shape))
    pos = next(k for k, x in enumerate(T.entries) if x != 0)
    idx = []
    for s in _strides(T.shape):
        q, pos = divmod(pos, s)
        idx.append(q)
    factors = []
    for mode, n in enumerate(T.shape):
        v = []
        for i in range(n):
            j = list(idx)
            j[mode] = i
            v.append(T[j])
        factors.append(tuple(v))
    # each factor above carries the pivot value; keep it once
    c_inv = f.inv(T[idx])
    for mode in range(T.order - 1):
        factors[mode] = vec_scale(f, c_inv, factors[mode])
    P = PureTensor(f, tuple(factors))
    if P.dense() != T:
        raise ValueError("tensor is not pure")
    return P


def sum_tensors(field: Field, shape: Sequence[int], terms: Iterable) -> Tensor:
    acc = Tensor.zeros(field, shape)
    for t in terms:
        acc = acc + (t.dense() if isinstance(t, PureTensor) else t)
    return acc


def last_mode_slices(T: Tensor) -> List[Tensor]:
    """``S_1, ..., S_{n_d}`` with ``T = sum_i S_i ⊗ e_i``."""
    if T.order < 2:
        raise ValueError("slicing needs a tensor of order at least 2")
    nd = T.shape[-1]
    sub = T.shape[:-1]
    return [Tensor(T.field, sub, T.entries[i::nd]) for i in range(nd)]


def recompose(slices: Sequence[Tensor]) -> Tensor:
    """Inverse of :func:`last_mode_slices`."""
    if not slices:
        raise ValueError("no slices")
    s0 = slices[0]
    if any(s.shape != s0.shape for s in slices):
        raise ValueError("slices differ in shape")
    nd = len(slices)
    entries = tuple(slices[i].entries[k] for k in range(len(s0.entries)) for i in range(nd))
    return Tensor(s0.field, s0.shape + (nd,), entries)


def flatten(T: Tensor) -> Vector:
    """Row-major vectorization; the fixed isomorphism onto ``F^{n_1...n_d}``."""
    return T.entries


def unflatten(field: Field, shape: Sequence[int], v: Sequence) -> Tensor:
    return Tensor(field, tuple(shape), tuple(v))
