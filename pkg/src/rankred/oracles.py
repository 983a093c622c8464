"""Brute-force ground truth over small prime fields.

All searches are exhaustive and deterministic. Matrices are handled in
numpy batches: an assignment block is evaluated with one matrix product and
its ranks come from a vectorized Gaussian elimination mod ``p``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import PureTensor, Tensor, rank, sum_tensors
from .fields import Field, PrimeField
from .instances import AffineMatrixFamily, PartialMatrix, lrmc_as_1rm

BUDGET_ENV = "RANKRED_BUDGET"


class OracleError(RuntimeError):
    pass


class BudgetExceeded(OracleError):
    pass


class InfiniteFieldError(OracleError):
    pass


class RankBoundExceeded(OracleError):
    """No decomposition of length ``<= r_max`` exists."""

    def __init__(self, r_max: int):
        super().__init__(f"rank > {r_max}")
        self.r_max = r_max


@dataclass(frozen=True)
class SearchBudget:
    max_assignments: int = 2 ** 24
    max_pure_candidates: int = 100_000

    def __post_init__(self):
        if self.max_assignments < 1 or self.max_pure_candidates < 1:
            raise ValueError("budgets must be positive")

    @classmethod
    def from_env(cls, default: Optional["SearchBudget"] = None) -> "SearchBudget":
        """``default`` with ``max_assignments`` taken from ``$RANKRED_BUDGET`` if set."""
        base = default or cls()
        raw = os.environ.get(BUDGET_ENV)
        if not raw:
            return base
        return cls(int(raw), base.max_pure_candidates)


@dataclass(frozen=True)
class OracleResult:
    minimum: int
    witness: Any
    explored: int


def _prime(field: Field) -> int:
    if not isinstance(field, PrimeField):
        raise InfiniteFieldError(f"exhaustive search needs a finite field, got {field!r}")
    return field.p


def _budget(budget: Optional[SearchBudget]) -> SearchBudget:
    return budget if budget is not None else SearchBudget.from_env()


# batched linear algebra


def _dtype(p: int):
    # a - f * b must stay representable
    if p <= 181:
        return np.int16
    if p < 46341:
        return np.int32
    return np.int64


def batch_rank(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks mod ``p`` of a stack of matrices with shape ``(N, n, m)``."""
    A = np.asarray(mats)
    if A.ndim == 2:
        A = A[None]
    N, n, m = A.shape
    if m > n:
        A = A.transpose(0, 2, 1)
        n, m = m, n
    rk = np.zeros(N, dtype=np.int64)
    if N == 0 or m == 0:
        return rk
    if p == 2:
        A = (A % 2).astype(bool)
    else:
        A = (A % p).astype(_dtype(p))
        inv = np.zeros(p, dtype=A.dtype)
        for x in range(1, p):
            inv[x] = pow(x, -1, p)
    rows = np.arange(n)
    for c in range(m):
        cand = (A[:, :, c] != 0) & (rows[None, :] >= rk[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        full = bool(has.all())
        sel = slice(None) if full else np.flatnonzero(has)
        Ps = A[sel, :, c:]
        K = Ps.shape[0]
        k = np.arange(K)
        piv = cand[sel].argmax(axis=1)
        tgt = rk[sel]
        prow = Ps[k, piv].copy()
        Ps[k, piv] = Ps[k, tgt]
        if p == 2:
            Ps[k, tgt] = prow
            fac = Ps[:, :, 0].copy()
            fac[k, tgt] = False
            Ps ^= fac[:, :, None] & prow[:, None, :]
        else:
            prow = prow * inv[prow[:, 0]][:, None] % p
            Ps[k, tgt] = prow
            fac = Ps[:, :, 0].copy()
            fac[k, tgt] = 0
            Ps -= fac[:, :, None] * prow[:, None, :]
            Ps %= p
        if not full:
            A[sel, :, c:] = Ps
        rk[sel] += 1
    return rk


def odometer(p: int, s: int, start: int = 0, count: Optional[int] = None) -> np.ndarray:
    """Rows ``start, start+1, ...`` of the base-``p`` odometer over ``s`` digits.

    The first column is the most significant digit.
    """
    total = p ** s
    if count is None:
        count = total - start
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.empty((count, s), dtype=np.int64)
    for j in range(s - 1, -1, -1):
        out[:, j] = idx % p
        idx //= p
    return out


def _family_arrays(fam: AffineMatrixFamily, variables: Sequence[str]):
    n, m = fam.shape
    base = np.array(fam.base.entries, dtype=np.int64)
    if variables:
        coeffs = np.array([fam.coeff(v).entries for v in variables], dtype=np.int64)
    else:
        coeffs = np.zeros((0, n * m), dtype=np.int64)
    return base, coeffs


def _chunk_size(n: int, m: int) -> int:
    return max(1, (1 << 21) // max(1, n * m))


def enumerate_ranks(fam: AffineMatrixFamily, variables: Optional[Sequence[str]] = None,
                    budget: Optional[SearchBudget] = None) -> Tuple[Tuple[str, ...], np.ndarray]:
    """Rank of ``fam`` at every assignment, in odometer order over ``variables``.

    ``variables`` defaults to the ids sorted. Row ``i`` of
    ``odometer(p, len(variables))`` is the assignment for ``ranks[i]``.
    """
    p = _prime(fam.field)
    vs = tuple(sorted(fam.variables)) if variables is None else tuple(variables)
    total = p ** len(vs)
    if total > _budget(budget).max_assignments:
        raise BudgetExceeded(f"{total} assignments exceed the budget")
    base, coeffs = _family_arrays(fam, vs)
    n, m = fam.shape
    out = np.empty(total, dtype=np.int64)
    step = _chunk_size(n, m)
    for start in range(0, total, step):
        cnt = min(step, total - start)
        digits = odometer(p, len(vs), start, cnt)
        mats = (base[None, :] + digits @ coeffs) % p
        out[start:start + cnt] = batch_rank(mats.reshape(cnt, n, m), p)
    return vs, out


def _decode(p: int, s: int, index: int) -> List[int]:
    return [int(x) for x in odometer(p, s, index, 1)[0]] if s else []


def _check_witness(fam: AffineMatrixFamily, witness: Dict[str, Any], minimum: int) -> None:
    got = rank(fam.evaluate(witness))
    if got != minimum:
        raise AssertionError(f"witness evaluates to rank {got}, expected {minimum}")


def min_rank_exhaustive(fam: AffineMatrixFamily, budget: Optional[SearchBudget] = None,
                        jobs: int = 1) -> OracleResult:
    """Exact minimum rank by full enumeration.

    The witness is the lexicographically smallest minimizer over variable ids
    sorted ascending with values ``0..p-1``. ``jobs > 1`` splits the range
    across threads without changing the result.
    """
    p = _prime(fam.field)
    vs = tuple(sorted(fam.variables))
    s = len(vs)
    total = p ** s
    if total > _budget(budget).max_assignments:
        raise BudgetExceeded(f"{p}^{s} = {total} assignments exceed the budget")
    base, coeffs = _family_arrays(fam, vs)
    n, m = fam.shape
    step = _chunk_size(n, m)
    starts = list(range(0, total, step))

    def run(start: int) -> Tuple[int, int]:
        cnt = min(step, total - start)
        digits = odometer(p, s, start, cnt)
        mats = (base[None, :] + digits @ coeffs) % p
        r = batch_rank(mats.reshape(cnt, n, m), p)
        k = int(r.argmin())
        return int(r[k]), start + k

    best: Optional[Tuple[int, int]] = None
    explored = 0
    if jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run, starts))
        best = min(results)
        explored = total
    else:
        for start in starts:
            res = run(start)
            explored += min(step, total - start)
            if best is None or res < best:
                best = res
            if best[0] == 0:
                break
    assert best is not None
    witness = dict(zip(vs, _decode(p, s, best[1])))
    _check_witness(fam, witness, best[0])
    return OracleResult(best[0], witness, explored)


# block-separable search


@dataclass(frozen=True)
class _Component:
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    shared: Tuple[str, ...]
    local: Tuple[str, ...]


def _components(fam: AffineMatrixFamily):
    n, m = fam.shape
    parent = list(range(n + m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    support = set(fam.base.nonzero_positions())
    touches: Dict[str, set] = {}
    for v, c in fam.terms:
        pos = c.nonzero_positions()
        support.update(pos)
        touches[v] = {i for i, _ in pos}
    for i, j in support:
        a, b = find(i), find(n + j)
        if a != b:
            parent[a] = b
    groups: Dict[int, Tuple[List[int], List[int]]] = {}
    for i in range(n):
        groups.setdefault(find(i), ([], []))[0].append(i)
    for j in range(m):
        groups.setdefault(find(n + j), ([], []))[1].append(j)
    comps = [(tuple(r), tuple(c)) for r, c in groups.values() if r and c]
    comps.sort()
    comp_of_row = {i: k for k, (rs, _) in enumerate(comps) for i in rs}
    var_comps = {v: sorted({comp_of_row[i] for i in rows}) for v, rows in touches.items()}
    return comps, var_comps


def separable_cost(fam: AffineMatrixFamily) -> int:
    """Number of evaluations :func:`min_rank_separable` would perform."""
    p = _prime(fam.field)
    comps, var_comps = _components(fam)
    shared = [v for v, cs in var_comps.items() if len(cs) > 1]
    per = [0] * len(comps)
    for v, cs in var_comps.items():
        for c in cs:
            per[c] += 1
    return sum(p ** k for k in per) + p ** len(shared)


def min_rank_separable(fam: AffineMatrixFamily, budget: Optional[SearchBudget] = None
                       ) -> OracleResult:
    """Exact minimum rank exploiting a block-diagonal support pattern.

    Rows and columns split into connected components of the joint support of
    the base and all coefficients; the rank is the sum over components. A
    variable meeting one component is local to it, otherwise shared. Each
    component is tabulated as the minimum over its local variables for every
    value of its shared ones, and the tables are summed over all shared
    assignments. The witness takes the first minimizing shared assignment in
    odometer order, then the first minimizing local values per component;
    variables with zero coefficient are set to 0.
    """
    p = _prime(fam.field)
    bud = _budget(budget)
    comps, var_comps = _components(fam)
    shared = tuple(sorted(v for v, cs in var_comps.items() if len(cs) > 1))
    if p ** len(shared) > bud.max_assignments:
        raise BudgetExceeded(f"{p}^{len(shared)} shared assignments exceed the budget")
    parts: List[_Component] = []
    for k, (rs, cs) in enumerate(comps):
        sh = tuple(v for v in shared if k in var_comps[v])
        loc = tuple(sorted(v for v, c in var_comps.items() if c == [k]))
        parts.append(_Component(rs, cs, sh, loc))

    explored = 0
    tables, argmins = [], []
    for comp in parts:
        vs = comp.shared + comp.local
        total = p ** len(vs)
        if total > bud.max_assignments:
            raise BudgetExceeded(f"component with {len(vs)} variables exceeds the budget")
        sub = AffineMatrixFamily(
            fam.base.submatrix(comp.rows, comp.cols),
            tuple((v, fam.coeff(v).submatrix(comp.rows, comp.cols)) for v in vs))
        _, ranks = enumerate_ranks(sub, vs, bud)
        explored += total
        grid = ranks.reshape(p ** len(comp.shared), p ** len(comp.local))
        tables.append(grid.min(axis=1))
        argmins.append(grid.argmin(axis=1))

    S = len(shared)
    pos = {v: j for j, v in enumerate(shared)}
    total = p ** S
    step = 1 << 18
    best: Optional[Tuple[int, int]] = None
    for start in range(0, total, step):
        cnt = min(step, total - start)
        digits = odometer(p, S, start, cnt)
        acc = np.zeros(cnt, dtype=np.int64)
        for comp, tab in zip(parts, tables):
            idx = np.zeros(cnt, dtype=np.int64)
            for v in comp.shared:
                idx = idx * p + digits[:, pos[v]]
            acc += tab[idx]
        k = int(acc.argmin())
        if best is None or (int(acc[k]), start + k) < best:
            best = (int(acc[k]), start + k)
        explored += cnt
    assert best is not None

    sh_vals = _decode(p, S, best[1])
    witness: Dict[str, Any] = {v: 0 for v in fam.variables}
    witness.update(zip(shared, sh_vals))
    for comp, arg in zip(parts, argmins):
        idx = 0
        for v in comp.shared:
            idx = idx * p + witness[v]
        witness.update(zip(comp.local, _decode(p, len(comp.local), int(arg[idx]))))
    _check_witness(fam, witness, best[0])
    return OracleResult(best[0], witness, explored)


def solve_min_rank(fam: AffineMatrixFamily, budget: Optional[SearchBudget] = None,
                   jobs: int = 1) -> OracleResult:
    """Exact minimum via whichever of the two searches is cheaper."""
    p = _prime(fam.field)
    if separable_cost(fam) < p ** len(fam.variables):
        return min_rank_separable(fam, budget)
    return min_rank_exhaustive(fam, budget, jobs)


def mrank_exhaustive(P: PartialMatrix, budget: Optional[SearchBudget] = None,
                     jobs: int = 1) -> OracleResult:
    """Minimal completion rank; the witness maps unknown names to values."""
    return min_rank_exhaustive(lrmc_as_1rm(P), budget, jobs)


def mrank(P: PartialMatrix, budget: Optional[SearchBudget] = None) -> OracleResult:
    return solve_min_rank(lrmc_as_1rm(P), budget)


# tensor rank


def _projective(p: int, n: int) -> np.ndarray:
    vs = odometer(p, n)
    nz = vs != 0
    keep = nz.any(axis=1)
    first = np.where(keep, nz.argmax(axis=1), 0)
    lead = vs[np.arange(len(vs)), first]
    return vs[keep & (lead == 1)]


def _nonzero(p: int, n: int) -> np.ndarray:
    vs = odometer(p, n)
    return vs[(vs != 0).any(axis=1)]


def pure_candidates(field: Field, shape: Sequence[int],
                    budget: Optional[SearchBudget] = None) -> Tuple[List[np.ndarray], np.ndarray]:
    """Normalized pure tensors: factor lists and their flattened dense forms.

    The first ``d - 1`` factors have first nonzero coordinate 1; the last is
    any nonzero vector. Every nonzero pure tensor appears exactly once.
    """
    p = _prime(field)
    shape = tuple(shape)
    facs = [_projective(p, n) for n in shape[:-1]] + [_nonzero(p, shape[-1])]
    count = prod(len(f) for f in facs)
    if count > _budget(budget).max_pure_candidates:
        raise BudgetExceeded(f"{count} pure candidates exceed the budget")
    dense = facs[0]
    for F in facs[1:]:
        dense = (dense[:, None, :, None] * F[None, :, None, :]).reshape(
            len(dense) * len(F), dense.shape[1] * F.shape[1]) % p
    return facs, dense


def _max_unfolding_rank(R: np.ndarray, shape: Tuple[int, ...], p: int) -> np.ndarray:
    K = R.shape[0]
    X = R.reshape((K,) + shape)
    best = np.zeros(K, dtype=np.int64)
    for j in range(len(shape)):
        U = np.moveaxis(X, 1 + j, 1).reshape(K, shape[j], -1)
        best = np.maximum(best, batch_rank(U, p))
    return best


def tensor_rank_exhaustive(T: Tensor, budget: Optional[SearchBudget] = None,
                           r_max: Optional[int] = None) -> OracleResult:
    """Exact tensor rank by iterative deepening over normalized pure tensors.

    Terms are chosen with strictly increasing candidate index; a partial sum
    is abandoned when some unfolding of the residual has rank above the
    number of terms left, and the final term is a hash lookup. The witness is
    a list of :class:`PureTensor` summing to ``T``.
    """
    p = _prime(T.field)
    bud = _budget(budget)
    shape = T.shape
    if r_max is None:
        r_max = prod(shape) // max(shape)
    target = np.array(T.entries, dtype=np.int64)
    if not target.any():
        return OracleResult(0, [], 1)
    facs, dense = pure_candidates(T.field, shape, bud)
    nc = len(dense)
    lookup: Dict[bytes, int] = {}
    for i in range(nc):
        lookup.setdefault(dense[i].tobytes(), i)
    sizes = [len(f) for f in facs]
    explored = 0

    def search(residual: np.ndarray, start: int, left: int) -> Optional[List[int]]:
        nonlocal explored
        if left == 1:
            explored += 1
            i = lookup.get(residual.tobytes())
            return [i] if i is not None and i >= start else None
        R = (residual[None, :] - dense[start:]) % p
        explored += len(R)
        if explored > bud.max_assignments:
            raise BudgetExceeded("tensor-rank search exceeded the budget")
        if left - 1 == 1:
            for k in range(len(R)):
                i = lookup.get(R[k].tobytes())
                if i is not None and i > start + k:
                    return [start + k, i]
            return None
        ok = np.flatnonzero(_max_unfolding_rank(R, shape, p) <= left - 1)
        for k in ok:
            rest = search(R[k], start + int(k) + 1, left - 1)
            if rest is not None:
                return [start + int(k)] + rest
        return None

    lower = int(_max_unfolding_rank(target[None, :], shape, p)[0])
    for r in range(max(1, lower), r_max + 1):
        found = search(target, 0, r)
        if found is None:
            continue
        terms = []
        for i in found:
            parts = np.unravel_index(i, sizes)
            terms.append(PureTensor(T.field, tuple(
                tuple(int(x) for x in facs[mode][k]) for mode, k in enumerate(parts))))
        if sum_tensors(T.field, shape, terms) != T:
            raise AssertionError("decomposition does not sum to T")
        return OracleResult(r, terms, explored)
    raise RankBoundExceeded(r_max)


__all__ = [
    "BUDGET_ENV", "BudgetExceeded", "InfiniteFieldError", "OracleError", "OracleResult",
    "RankBoundExceeded", "SearchBudget", "batch_rank", "enumerate_ranks", "min_rank_exhaustive",
    "min_rank_separable", "mrank", "mrank_exhaustive", "odometer", "pure_candidates",
    "separable_cost", "solve_min_rank", "tensor_rank_exhaustive",
]
