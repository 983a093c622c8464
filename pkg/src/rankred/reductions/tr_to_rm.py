"""Tensor rank of any order as rank minimization via padded block matrices.

``pad(M) = [[M, ?], [?, 1]]`` has minimal completion rank ``max(1, rank M)``.
For ``T`` with last-mode slices ``S_1, ..., S_n`` let ``N(T)`` be the matrix
whose columns are the flattened slices. Recursively

    A(T) = diag(pad(N(T)), A(S_1), ..., A(S_n)),   A(M) = pad(M) for matrices
    B(T) = diag(N(T),      A(S_1), ..., A(S_n)),   B(M) = M

and ``mrank B(T) >= rank T + K(shape)`` with equality for ``rank T <= 1``.
Chaining ``k`` copies ``B(U_0 - U_1), ..., B(U_{k-1} - U_k)`` with ``U_0 = T``
and ``U_k = 0`` gives a family whose minimum is ``rank T + k K`` once
``k >= rank T``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..algebra import Matrix, PureTensor, Tensor, rank, sum_tensors
from ..fields import Field, field_from_tag
from ..instances import (AffineMatrixFamily, Assignment, Certificate, PartialMatrix, Unknown,
                         register_pullback)


@dataclass(frozen=True)
class Panel:
    """A dense submatrix of tensor entries, optionally padded.

    ``index`` lists, row-major, the flat tensor index shown in each cell. A
    padded panel owns ``rows + cols`` fills: first the new column (top to
    bottom), then the new row (left to right).
    """

    row: int
    col: int
    rows: int
    cols: int
    index: Tuple[int, ...]
    padded: bool

    @property
    def n_fills(self) -> int:
        return self.rows + self.cols if self.padded else 0

    def fill_cells(self) -> List[Tuple[int, int]]:
        if not self.padded:
            return []
        return ([(self.row + i, self.col + self.cols) for i in range(self.rows)]
                + [(self.row + self.rows, self.col + j) for j in range(self.cols)])

    @property
    def corner(self) -> Optional[Tuple[int, int]]:
        return (self.row + self.rows, self.col + self.cols) if self.padded else None


@dataclass(frozen=True)
class PaddedBlock:
    """Layout of ``A(T)`` (kind ``"padA"``) or ``B(T)`` (kind ``"plainB"``).

    Panels are listed in recursion order: ``N`` first, then the blocks of
    ``A(S_1)``, ..., ``A(S_n)`` depth-first.
    """

    kind: str
    shape: Tuple[int, ...]
    rows: int
    cols: int
    panels: Tuple[Panel, ...]

    @property
    def n_fills(self) -> int:
        return sum(p.n_fills for p in self.panels)

    def fill_cells(self) -> List[Tuple[int, int]]:
        return [c for p in self.panels for c in p.fill_cells()]

    def entry_cells(self) -> List[Tuple[int, int, int]]:
        """``(row, col, flat tensor index)`` for every tensor-valued cell."""
        out = []
        for p in self.panels:
            for k, idx in enumerate(p.index):
                i, j = divmod(k, p.cols)
                out.append((p.row + i, p.col + j, idx))
        return out

    def assemble(self, field: Field, entries: Sequence, fills: Sequence) -> Matrix:
        e = [field.zero] * (self.rows * self.cols)
        for i, j, idx in self.entry_cells():
            e[i * self.cols + j] = entries[idx]
        for (i, j), x in zip(self.fill_cells(), fills):
            e[i * self.cols + j] = field(x)
        for p in self.panels:
            if p.padded:
                i, j = p.corner
                e[i * self.cols + j] = field.one
        return Matrix(field, self.rows, self.cols, tuple(e))


def k_constant(shape: Sequence[int]) -> int:
    """``n_3 n_4 ... n_d + n_4 ... n_d + ... + n_d``."""
    if len(shape) < 2:
        raise ValueError("K needs at least two modes")
    return sum(prod(shape[j:]) for j in range(2, len(shape)))


def _panels(shape: Tuple[int, ...], index: Tuple[int, ...], row: int, col: int,
            pad_top: bool) -> Tuple[List[Panel], int, int]:
    if len(shape) == 2:
        p = Panel(row, col, shape[0], shape[1], index, pad_top)
        extra = 1 if pad_top else 0
        return [p], shape[0] + extra, shape[1] + extra
    nd = shape[-1]
    P = prod(shape[:-1])
    top = Panel(row, col, P, nd, index, pad_top)
    extra = 1 if pad_top else 0
    out = [top]
    r, c = row + P + extra, col + nd + extra
    for i in range(nd):
        sub_index = index[i::nd]
        panels, h, w = _panels(shape[:-1], sub_index, r, c, True)
        out.extend(panels)
        r += h
        c += w
    return out, r - row, c - col


def layout_a(shape: Sequence[int]) -> PaddedBlock:
    shape = tuple(shape)
    if len(shape) < 2:
        raise ValueError("A(T) needs order at least 2")
    panels, h, w = _panels(shape, tuple(range(prod(shape))), 0, 0, True)
    return PaddedBlock("padA", shape, h, w, tuple(panels))


def layout_b(shape: Sequence[int]) -> PaddedBlock:
    shape = tuple(shape)
    if len(shape) < 2:
        raise ValueError("B(T) needs order at least 2")
    panels, h, w = _panels(shape, tuple(range(prod(shape))), 0, 0, False)
    return PaddedBlock("plainB", shape, h, w, tuple(panels))


def _partial(layout: PaddedBlock, T: Tensor, prefix: str) -> PartialMatrix:
    f = T.field
    fills = [Unknown(f"{prefix}{n}") for n in range(1, layout.n_fills + 1)]
    cells: List[Any] = list(layout.assemble(f, T.entries, [f.zero] * layout.n_fills).entries)
    for (i, j), u in zip(layout.fill_cells(), fills):
        cells[i * layout.cols + j] = u
    return PartialMatrix(f, layout.rows, layout.cols, tuple(cells))


def pad(M: Matrix) -> PartialMatrix:
    """``[[M, ?], [?, 1]]`` with fresh unknowns ``fill.1, ...``."""
    return _partial(layout_a((M.rows, M.cols)), Tensor.from_matrix(M), "fill.")


def build_a(T: Tensor) -> PartialMatrix:
    return _partial(layout_a(T.shape), T, "fill.")


def build_b(T: Tensor) -> PartialMatrix:
    return _partial(layout_b(T.shape), T, "fill.")


def a_lemma_value(shape: Sequence[int], tensor_rank: int) -> int:
    return max(1, tensor_rank) + k_constant(shape)


def b_lemma_value(shape: Sequence[int], tensor_rank: int) -> int:
    return tensor_rank + k_constant(shape)


# witnesses


def pad_witness(M: Matrix) -> Tuple[List, List]:
    """Fills ``(v, w)`` with ``rank [[M, v], [w^t, 1]] = max(1, rank M)``.

    ``v`` is the first nonzero column of ``M`` and ``w^t`` the row ``i`` of
    ``M`` divided by ``v_i`` for the first ``i`` with ``v_i != 0``.
    """
    f = M.field
    cols = M.nonzero_cols()
    if not cols:
        return [f.zero] * M.rows, [f.zero] * M.cols
    v = list(M.col(cols[0]))
    i = next(k for k, x in enumerate(v) if x != 0)
    inv = f.inv(v[i])
    return v, [f.mul(inv, x) for x in M.row(i)]


def layout_witness(layout: PaddedBlock, field: Field, entries: Sequence) -> List:
    """Fill values minimizing every padded panel independently.

    By block additivity this minimizes the whole layout, so the resulting rank
    is the exact ``mrank`` for any entries.
    """
    out: List = []
    for p in layout.panels:
        if not p.padded:
            continue
        M = Matrix(field, p.rows, p.cols, tuple(entries[idx] for idx in p.index))
        v, w = pad_witness(M)
        out.extend(v)
        out.extend(w)
    return out


def _named(fills: Sequence, prefix: str) -> Assignment:
    return {f"{prefix}{n}": x for n, x in enumerate(fills, start=1)}


def a_witness(T: Tensor) -> Assignment:
    return _named(layout_witness(layout_a(T.shape), T.field, T.entries), "fill.")


def b_witness(T: Tensor) -> Assignment:
    return _named(layout_witness(layout_b(T.shape), T.field, T.entries), "fill.")


def layout_mrank(layout: PaddedBlock, T: Tensor) -> int:
    """Closed-form ``mrank``: panel ranks with ``max(1, .)`` on padded ones."""
    total = 0
    for p in layout.panels:
        r = rank(Matrix(T.field, p.rows, p.cols, tuple(T.entries[i] for i in p.index)))
        total += max(1, r) if p.padded else r
    return total


# the telescoping family


def _multi(shape: Sequence[int]) -> List[str]:
    return [".".join(str(i + 1) for i in idx)
            for idx in itertools.product(*(range(n) for n in shape))]


@dataclass(frozen=True)
class CGadget:
    """``diag(B(U_0 - U_1), ..., B(U_{k-1} - U_k))`` with ``U_0 = T``, ``U_k = 0``.

    Variables ``u.b.i1...id`` (``1 <= b < k``) are the entries of ``U_b`` and
    ``fill.b.n`` the ``n``-th fill of block ``b``.
    """

    family: AffineMatrixFamily
    layout: PaddedBlock
    tensor: Tensor
    k: int
    K_value: int

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.tensor.shape

    @property
    def offset(self) -> int:
        return self.k * self.K_value

    def block_origin(self, b: int) -> Tuple[int, int]:
        return ((b - 1) * self.layout.rows, (b - 1) * self.layout.cols)

    def u_var(self, b: int, flat: int) -> str:
        return f"u.{b}.{_multi(self.shape)[flat]}"

    def certificate(self) -> Certificate:
        f = self.tensor.field
        return Certificate("telescoping", self.offset, {
            "field": f.tag(), "k": self.k, "shape": list(self.shape),
            "entries": [f.to_json(x) for x in self.tensor.entries]})


def build_c(T: Tensor, k: int) -> CGadget:
    if k < 1:
        raise ValueError("k must be at least 1")
    f = T.field
    lay = layout_b(T.shape)
    R, C = lay.rows, lay.cols
    rows, cols = k * R, k * C
    names = _multi(T.shape)
    base = [f.zero] * (rows * cols)
    terms: Dict[str, List] = {}
    for b in range(1, k):
        for nm in names:
            terms[f"u.{b}.{nm}"] = [f.zero] * (rows * cols)
    one, neg_one = f.one, f.neg(f.one)
    for b in range(1, k + 1):
        r0, c0 = (b - 1) * R, (b - 1) * C
        for i, j, idx in lay.entry_cells():
            pos = (r0 + i) * cols + c0 + j
            if b == 1:
                base[pos] = T.entries[idx]
            else:
                terms[f"u.{b - 1}.{names[idx]}"][pos] = one
            if b < k:
                terms[f"u.{b}.{names[idx]}"][pos] = neg_one
        for p in lay.panels:
            if p.padded:
                i, j = p.corner
                base[(r0 + i) * cols + c0 + j] = one
        for n, (i, j) in enumerate(lay.fill_cells(), start=1):
            e = [f.zero] * (rows * cols)
            e[(r0 + i) * cols + c0 + j] = one
            terms[f"fill.{b}.{n}"] = e
    fam = AffineMatrixFamily(Matrix(f, rows, cols, tuple(base)),
                             tuple((v, Matrix(f, rows, cols, tuple(e))) for v, e in terms.items()))
    return CGadget(fam, lay, T, k, k_constant(T.shape))


def differences(T: Tensor, k: int, a: Assignment) -> List[Tensor]:
    """``U_0 - U_1, ..., U_{k-1} - U_k`` under ``a``."""
    f = T.field
    names = _multi(T.shape)
    U = [T] + [Tensor(f, T.shape, tuple(f(a[f"u.{b}.{nm}"]) for nm in names))
               for b in range(1, k)] + [Tensor.zeros(f, T.shape)]
    return [U[b] - U[b + 1] for b in range(k)]


def c_witness(g: CGadget, terms: Sequence) -> Assignment:
    """Assignment with ``U_b = T - (P_1 + ... + P_b)`` and optimal fills.

    ``terms`` (pure or dense tensors, at most ``k``) must sum to ``T``;
    missing ones are zero. Evaluates to ``rank T + kK`` when the terms form
    a minimal decomposition.
    """
    f = g.tensor.field
    if len(terms) > g.k:
        raise ValueError("more terms than blocks")
    dense = [t.dense() if isinstance(t, PureTensor) else t for t in terms]
    dense += [Tensor.zeros(f, g.shape)] * (g.k - len(dense))
    if sum_tensors(f, g.shape, dense) != g.tensor:
        raise ValueError("terms do not sum to T")
    names = _multi(g.shape)
    a: Assignment = {}
    U = g.tensor
    for b in range(1, g.k + 1):
        W = dense[b - 1]
        for n, x in enumerate(layout_witness(g.layout, f, W.entries), start=1):
            a[f"fill.{b}.{n}"] = x
        U = U - W
        if b < g.k:
            for nm, x in zip(names, U.entries):
                a[f"u.{b}.{nm}"] = x
    return a


def tensor_rank_via_c(T: Tensor, k: int, solver: Callable[[AffineMatrixFamily], Any]
                      ) -> Tuple[int, List[Tensor]]:
    """``min rank C - kK`` and the nonzero differences at the minimizer.

    ``k`` must bound ``rank T`` from above. The differences sum to ``T`` and
    their ranks sum to the returned value.
    """
    g = build_c(T, k)
    res = solver(g.family)
    diffs = [W for W in differences(T, k, res.witness) if not W.is_zero()]
    return res.minimum - g.offset, diffs


@register_pullback("telescoping")
def _pull_telescoping(data, a):
    f = field_from_tag(data["field"])
    T = Tensor.from_entries(f, data["shape"], data["entries"])
    return [W for W in differences(T, int(data["k"]), a) if not W.is_zero()]


__all__ = [
    "CGadget", "PaddedBlock", "Panel", "a_lemma_value", "a_witness", "b_lemma_value",
    "b_witness", "build_a", "build_b", "build_c", "c_witness", "differences", "k_constant",
    "layout_a", "layout_b", "layout_mrank", "layout_witness", "pad", "pad_witness",
    "tensor_rank_via_c",
]
