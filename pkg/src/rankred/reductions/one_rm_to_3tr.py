"""Rank-one rank minimization as a tensor rank question.

The family ``A + sum_k x_k B_k`` (``B_k`` rank one and linearly independent)
is stacked into ``T = A ⊗ e_{s+1} + sum_k B_k ⊗ e_k``. Then
``rank T = s + min_x rank(A + sum_k x_k B_k)`` and any minimal decomposition
``T = sum_j D_j ⊗ c_j`` yields a minimizer: pick ``s`` of the ``c_j`` that
together with ``e_{s+1}`` form a basis, let ``f`` vanish on them with
``f(e_{s+1}) = 1``, and set ``x_k = f(e_k)``.

The same construction works for tensor completion, where ``A`` is a tensor
and the ``B_k`` are pure tensors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from ..algebra import (Matrix, PureTensor, Tensor, in_span, pure_from_tensor, rank,
                       rank_one_decompose, recompose, solve, sum_tensors, unit_vector, vec_scale)
from ..fields import Field, field_from_tag
from ..instances import AffineMatrixFamily, Assignment, Certificate, register_pullback, validate_1rm


class DependentCoefficients(ValueError):
    pass


class InvalidDecomposition(ValueError):
    pass


@dataclass(frozen=True)
class StackedTensor:
    tensor: Tensor
    base: Tensor
    coefficients: Tuple[Tensor, ...]
    variables: Tuple[str, ...]

    @property
    def s(self) -> int:
        return len(self.coefficients)

    @property
    def field(self) -> Field:
        return self.tensor.field

    def certificate(self) -> Certificate:
        return Certificate("stacked_tensor", self.s,
                           {"variables": list(self.variables), "field": self.field.tag()})


def _stack(base: Tensor, coeffs: Sequence[Tensor], variables: Sequence[str]) -> StackedTensor:
    f = base.field
    flat = [c.entries for c in coeffs]
    if flat and rank(Matrix(f, len(flat), len(flat[0]), tuple(x for v in flat for x in v))) < len(flat):
        raise DependentCoefficients("coefficient tensors are linearly dependent")
    T = recompose(list(coeffs) + [base])
    return StackedTensor(T, base, tuple(coeffs), tuple(variables))


def build_stacked_tensor(fam: AffineMatrixFamily) -> StackedTensor:
    """Order-3 tensor with slices ``B_1, ..., B_s, A`` along the last mode."""
    if not validate_1rm(fam):
        raise ValueError("every coefficient must have rank 1")
    return _stack(Tensor.from_matrix(fam.base),
                  [Tensor.from_matrix(c) for _, c in fam.terms], fam.variables)


def build_stacked_tensor_completion(A: Tensor, B_list: Sequence[PureTensor],
                                    variables: Optional[Sequence[str]] = None) -> StackedTensor:
    """Order-(d+1) stacked tensor for ``min_x rank(A + sum x_k B_k)`` over tensors."""
    coeffs = []
    for B in B_list:
        if B.shape != A.shape:
            raise ValueError(f"pure tensor of shape {B.shape} does not match {A.shape}")
        coeffs.append(B.dense())
    if variables is None:
        variables = [f"x.{k}" for k in range(1, len(coeffs) + 1)]
    return _stack(A, coeffs, variables)


def min_rank_from_tensor_rank(t: StackedTensor, tensor_rank: int) -> int:
    if tensor_rank < t.s:
        raise ValueError(f"claimed tensor rank {tensor_rank} is below s = {t.s}")
    return tensor_rank - t.s


def _functional(field: Field, cs: Sequence[Sequence], s: int) -> Tuple[List[int], Tuple]:
    """Greedy basis ``c_{j_1}, ..., c_{j_s}, e_{s+1}`` and the functional ``f``.

    Returns the chosen indices and ``f`` as a coefficient vector.
    """
    e_last = unit_vector(field, s + 1, s)
    chosen: List[int] = []
    basis = [e_last]
    for j, c in enumerate(cs):
        if len(chosen) == s:
            break
        if not in_span(field, basis, c):
            chosen.append(j)
            basis.append(tuple(c))
    if len(chosen) < s:
        raise InvalidDecomposition("last factors together with e_{s+1} do not span")
    rows = [cs[j] for j in chosen] + [e_last]
    M = Matrix(field, s + 1, s + 1, tuple(x for r in rows for x in r))
    rhs = [field.zero] * s + [field.one]
    # f(row) = rhs for every basis row: solve M f = rhs
    return chosen, solve(field, M, rhs)


def _apply(field: Field, f: Sequence, c: Sequence):
    acc = field.zero
    for a, b in zip(f, c):
        acc = field.add(acc, field.mul(a, b))
    return acc


def recover_minimizer(t: StackedTensor, decomp: Sequence[PureTensor]
                      ) -> Tuple[Assignment, List[PureTensor]]:
    """Minimizer ``x_k = f(e_k)`` and the decomposition of the minimized matrix.

    The residual list holds ``f(c_j) D_j`` for the terms not used in the basis,
    dropping zero terms; for a minimal ``decomp`` its length is ``l - s``.
    """
    f = t.field
    if sum_tensors(f, t.tensor.shape, decomp) != t.tensor:
        raise InvalidDecomposition("decomposition does not sum to the stacked tensor")
    cs = [p.factors[-1] for p in decomp]
    chosen, func = _functional(f, cs, t.s)
    x = {v: func[k] for k, v in enumerate(t.variables)}
    residual = []
    for j, p in enumerate(decomp):
        if j in chosen:
            continue
        c = _apply(f, func, p.factors[-1])
        if c == 0 or p.is_zero():
            continue
        head = list(p.factors[:-1])
        head[-1] = vec_scale(f, c, head[-1])
        residual.append(PureTensor(f, tuple(head)))
    return x, residual


def decomposition_from_assignment(t: StackedTensor, a: Assignment,
                                  inner: Optional[Sequence[PureTensor]] = None) -> List[PureTensor]:
    """Write ``T`` as ``rank(A + sum x_k B_k) + s`` pure tensors.

    ``T = sum_j C_j ⊗ e_{s+1} + sum_k B_k ⊗ (e_k - x_k e_{s+1})`` where
    ``C_j`` decompose the evaluated matrix. For matrices the ``C_j`` come from
    :func:`rank_one_decompose`; higher-order callers pass ``inner``.
    """
    f = t.field
    s = t.s
    X = t.base
    for v, B in zip(t.variables, t.coefficients):
        X = X + B.scale(a[v])
    if inner is None:
        if X.order != 2:
            raise ValueError("pass `inner` for tensors of order above 2")
        inner = [PureTensor(f, (v, w)) for v, w in rank_one_decompose(X.to_matrix())]
    e_last = unit_vector(f, s + 1, s)
    out = [PureTensor(f, tuple(p.factors) + (e_last,)) for p in inner]
    for k, (v, B) in enumerate(zip(t.variables, t.coefficients)):
        c = list(unit_vector(f, s + 1, k))
        c[s] = f.neg(f(a[v]))
        out.append(PureTensor(f, pure_from_tensor(B).factors + (tuple(c),)))
    return out


@register_pullback("stacked_tensor")
def _pull_stacked(data, decomp):
    f = field_from_tag(data["field"])
    variables = data["variables"]
    cs = [tuple(f(x) for x in p.factors[-1]) for p in decomp]
    _, func = _functional(f, cs, len(variables))
    return {v: func[k] for k, v in enumerate(variables)}


__all__ = [
    "StackedTensor", "DependentCoefficients", "InvalidDecomposition",
    "build_stacked_tensor", "build_stacked_tensor_completion",
    "min_rank_from_tensor_rank", "recover_minimizer", "decomposition_from_assignment",
]
