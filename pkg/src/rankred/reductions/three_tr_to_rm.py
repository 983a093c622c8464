"""Order-3 tensor rank as rank minimization over the E-gadget.

For ``T`` of shape ``(p, q, r)`` with last-mode slices ``S_1, ..., S_r`` and a
bound ``k >= rank T``, the family

    E(a, b, lam) = diag(C_1, ..., C_r, D_1, ..., D_k)
    C_i = [[S_i, A, 0], [0, I_k, -Lam_i], [B^t, 0, I_k]],   D_j = (a_j; b_j)

has minimum rank ``2kr + rank T``. Here ``A`` (p x k), ``B`` (q x k) and the
diagonal ``Lam_i`` hold the variables ``a.u.j``, ``b.v.j`` and ``lam.i.j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from ..algebra import (Matrix, PureTensor, Tensor, last_mode_slices, rank, rank_one_decompose,
                       sum_tensors, unit_vector, vec_is_zero)
from ..fields import field_from_tag
from ..instances import AffineMatrixFamily, Certificate, register_pullback


class NotMinimal(ValueError):
    pass


@dataclass(frozen=True)
class EGadget:
    family: AffineMatrixFamily
    tensor: Tensor
    k: int

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.tensor.shape  # type: ignore[return-value]

    @property
    def offset(self) -> int:
        return 2 * self.k * self.shape[2]

    def a_var(self, u: int, j: int) -> str:
        return f"a.{u}.{j}"

    def b_var(self, v: int, j: int) -> str:
        return f"b.{v}.{j}"

    def lam_var(self, i: int, j: int) -> str:
        return f"lam.{i}.{j}"

    def certificate(self) -> Certificate:
        f = self.tensor.field
        return Certificate("e_gadget", self.offset, {
            "field": f.tag(), "k": self.k, "shape": list(self.shape),
            "entries": [f.to_json(x) for x in self.tensor.entries]})


def e_dimensions(p: int, q: int, r: int, k: int) -> Tuple[int, int]:
    return ((p + 2 * k) * r + (p + q) * k, (q + 2 * k) * r + k)


def default_k(shape: Sequence[int]) -> int:
    p, q, r = shape
    return min(p * q, p * r, q * r)


def assemble_c(S: Matrix, A: Matrix, B: Matrix, lam: Sequence) -> Matrix:
    """The block ``[[S, A, 0], [0, I, -Lam], [B^t, 0, I]]``."""
    f = S.field
    p, q = S.shape
    k = A.cols
    rows, cols = p + 2 * k, q + 2 * k
    e = [f.zero] * (rows * cols)
    for u in range(p):
        for v in range(q):
            e[u * cols + v] = S[u, v]
        for j in range(k):
            e[u * cols + q + j] = A[u, j]
    for j in range(k):
        e[(p + j) * cols + q + j] = f.one
        e[(p + j) * cols + q + k + j] = f.neg(f(lam[j]))
        e[(p + k + j) * cols + q + k + j] = f.one
        for v in range(q):
            e[(p + k + j) * cols + v] = B[v, j]
    return Matrix(f, rows, cols, tuple(e))


def block_rank_identity_check(S: Matrix, A: Matrix, B: Matrix, lam: Sequence) -> bool:
    """``rank C == 2k + rank(S - A Lam B^t)``."""
    f = S.field
    k = A.cols
    resid = S
    for j in range(k):
        resid = resid - Matrix.outer(f, A.col(j), B.col(j)).scale(lam[j])
    return rank(assemble_c(S, A, B, lam)) == 2 * k + rank(resid)


def build_e(T: Tensor, k: int) -> EGadget:
    if T.order != 3:
        raise ValueError(f"E-gadget needs an order-3 tensor, got order {T.order}")
    if k < 1:
        raise ValueError("k must be at least 1")
    f = T.field
    p, q, r = T.shape
    rows, cols = e_dimensions(p, q, r, k)
    slices = [S.to_matrix() for S in last_mode_slices(T)]

    base = [f.zero] * (rows * cols)
    coeff: Dict[str, List] = {}

    def term(name: str) -> List:
        if name not in coeff:
            coeff[name] = [f.zero] * (rows * cols)
        return coeff[name]

    for u in range(p):
        for j in range(k):
            term(f"a.{u + 1}.{j + 1}")
    for v in range(q):
        for j in range(k):
            term(f"b.{v + 1}.{j + 1}")
    for i in range(r):
        for j in range(k):
            term(f"lam.{i + 1}.{j + 1}")

    neg_one = f.neg(f.one)
    for i in range(r):
        r0, c0 = i * (p + 2 * k), i * (q + 2 * k)
        S = slices[i]
        for u in range(p):
            for v in range(q):
                base[(r0 + u) * cols + c0 + v] = S[u, v]
        for j in range(k):
            base[(r0 + p + j) * cols + c0 + q + j] = f.one
            base[(r0 + p + k + j) * cols + c0 + q + k + j] = f.one
            term(f"lam.{i + 1}.{j + 1}")[(r0 + p + j) * cols + c0 + q + k + j] = neg_one
            for u in range(p):
                term(f"a.{u + 1}.{j + 1}")[(r0 + u) * cols + c0 + q + j] = f.one
            for v in range(q):
                term(f"b.{v + 1}.{j + 1}")[(r0 + p + k + j) * cols + c0 + v] = f.one
    for j in range(k):
        r0 = r * (p + 2 * k) + j * (p + q)
        c0 = r * (q + 2 * k) + j
        for u in range(p):
            term(f"a.{u + 1}.{j + 1}")[(r0 + u) * cols + c0] = f.one
        for v in range(q):
            term(f"b.{v + 1}.{j + 1}")[(r0 + p + v) * cols + c0] = f.one

    fam = AffineMatrixFamily(Matrix(f, rows, cols, tuple(base)),
                             tuple((n, Matrix(f, rows, cols, tuple(e))) for n, e in coeff.items()))
    return EGadget(fam, T, k)


def _factors_from(T: Tensor, k: int, a: Mapping[str, Any]):
    f = T.field
    p, q, r = T.shape
    A = [tuple(f(a[f"a.{u + 1}.{j + 1}"]) for u in range(p)) for j in range(k)]
    B = [tuple(f(a[f"b.{v + 1}.{j + 1}"]) for v in range(q)) for j in range(k)]
    lam = [[f(a[f"lam.{i + 1}.{j + 1}"]) for j in range(k)] for i in range(r)]
    return A, B, lam


def _decompose(T: Tensor, k: int, a: Mapping[str, Any]) -> List[PureTensor]:
    f = T.field
    p, q, r = T.shape
    A, B, lam = _factors_from(T, k, a)
    out: List[PureTensor] = []
    for i, S in enumerate(last_mode_slices(T)):
        U = S.to_matrix()
        for j in range(k):
            if lam[i][j] != 0:
                U = U - Matrix.outer(f, A[j], B[j]).scale(lam[i][j])
        e_i = unit_vector(f, r, i)
        out.extend(PureTensor(f, (v, w, e_i)) for v, w in rank_one_decompose(U))
    for j in range(k):
        c = tuple(lam[i][j] for i in range(r))
        if vec_is_zero(A[j]) or vec_is_zero(B[j]) or vec_is_zero(c):
            continue
        out.append(PureTensor(f, (A[j], B[j], c)))
    if sum_tensors(f, T.shape, out) != T:
        raise AssertionError("recovered terms do not sum to T")
    return out


def recover_decomposition(g: EGadget, a: Mapping[str, Any]) -> List[PureTensor]:
    """Pure tensors from a minimizing assignment.

    Emits the rank-one pieces of ``U_i = S_i - sum_j lam_ij a_j b_j^t`` lifted
    by ``e_i`` and the terms ``a_j ⊗ b_j ⊗ (sum_i lam_ij e_i)`` with both
    ``a_j`` and ``b_j`` nonzero. Raises :class:`NotMinimal` when the count does
    not match ``rank E(a) - 2kr``.
    """
    out = _decompose(g.tensor, g.k, a)
    expected = rank(g.family.evaluate(a)) - g.offset
    if len(out) != expected:
        raise NotMinimal(f"recovered {len(out)} terms but rank E - 2kr = {expected}")
    return out


def minimizing_assignment(g: EGadget, decomp: Sequence[PureTensor]) -> Dict[str, Any]:
    """Assignment attaining ``2kr + len(decomp)`` from a decomposition of ``T``.

    Uses ``a_j, b_j`` from the terms (zero beyond ``len(decomp)``) and
    ``lam_ij`` equal to the ``i``-th entry of the third factor.
    """
    f = g.tensor.field
    p, q, r = g.shape
    if len(decomp) > g.k:
        raise ValueError("decomposition longer than k")
    a: Dict[str, Any] = {}
    for j in range(g.k):
        if j < len(decomp):
            x, y, z = decomp[j].factors
        else:
            x, y, z = (f.zero,) * p, (f.zero,) * q, (f.zero,) * r
        for u in range(p):
            a[f"a.{u + 1}.{j + 1}"] = x[u]
        for v in range(q):
            a[f"b.{v + 1}.{j + 1}"] = y[v]
        for i in range(r):
            a[f"lam.{i + 1}.{j + 1}"] = z[i]
    return a


def tensor_rank_via_rm(T: Tensor, solver: Callable[[AffineMatrixFamily], Any],
                       k: Optional[int] = None) -> Tuple[int, List[PureTensor]]:
    """``rank T`` as ``min rank E - 2kr`` plus a decomposition of that length.

    ``solver`` maps a family to an object with ``minimum`` and ``witness``
    attributes, e.g. the exhaustive oracles.
    """
    if k is None:
        k = default_k(T.shape)
    g = build_e(T, k)
    res = solver(g.family)
    return res.minimum - g.offset, recover_decomposition(g, res.witness)


@register_pullback("e_gadget")
def _pull_e(data, a):
    f = field_from_tag(data["field"])
    T = Tensor.from_entries(f, data["shape"], data["entries"])
    return _decompose(T, int(data["k"]), a)


__all__ = [
    "EGadget", "NotMinimal", "assemble_c", "block_rank_identity_check", "build_e",
    "default_k", "e_dimensions", "minimizing_assignment", "recover_decomposition",
    "tensor_rank_via_rm",
]
