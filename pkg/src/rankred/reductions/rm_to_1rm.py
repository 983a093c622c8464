"""Rank minimization with arbitrary coefficient matrices to the rank-one case.

One coefficient ``B = sum_i v_i w_i^t`` of rank ``r`` is traded for the
J-gadget in variables ``x_i``, ``y_{i,j}`` (``i != j``) and ``z_{i,j}``
(``i < j``). Its layout is

    [ E(x) | C_{1,2} ... C_{r-1,r} ]
    [  0   | diag(D_{1,2}, ..., D_{r-1,r}) ]

with ``E(x) = A + sum x_i v_i w_i^t``, ``C_{i,j} = ((y_ij - x_i) v_i, (y_ji - x_j) v_j)``
and ``D_{i,j} = (y_ij - z_ij, y_ji - z_ij)``. Every coefficient is rank one and
the gadget's minimum rank equals ``min_x rank(A + x B)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..algebra import Matrix, Vector, rank_one_decompose
from ..instances import AffineMatrixFamily, Certificate, register_pullback

Pair = Tuple[int, int]


def _names(level: Optional[int], r: int):
    pre = "" if level is None else f"{level}."
    xs = [f"x.{pre}{i}" for i in range(1, r + 1)]
    ys = {(i, j): f"y.{pre}{i}.{j}"
          for i in range(1, r + 1) for j in range(1, r + 1) if i != j}
    zs = {(i, j): f"z.{pre}{i}.{j}" for i, j in combinations(range(1, r + 1), 2)}
    return xs, ys, zs


@dataclass(frozen=True)
class JGadget:
    family: AffineMatrixFamily
    decomposition: Tuple[Tuple[Vector, Vector], ...]
    n: int
    m: int
    x_vars: Tuple[str, ...]
    y_vars: Dict[Pair, str]
    z_vars: Dict[Pair, str]
    pairs: Tuple[Pair, ...]

    @property
    def r(self) -> int:
        return len(self.x_vars)

    def c_columns(self, pair: Pair) -> Tuple[int, int]:
        """0-based columns holding ``C_{i,j}``."""
        k = self.pairs.index(pair)
        return (self.m + 2 * k, self.m + 2 * k + 1)

    def d_row(self, pair: Pair) -> int:
        return self.n + self.pairs.index(pair)

    def z(self, i: int, j: int) -> str:
        return self.z_vars[(min(i, j), max(i, j))]

    def pullback_data(self, source_var: str) -> Dict[str, Any]:
        return {
            "source": source_var,
            "x": list(self.x_vars),
            "y": [[i, j, v] for (i, j), v in sorted(self.y_vars.items())],
            "z": [[i, j, v] for (i, j), v in sorted(self.z_vars.items())],
        }


def build_j(A: Union[Matrix, AffineMatrixFamily], B: Matrix, *,
            decomposition: Optional[Sequence[Tuple[Sequence, Sequence]]] = None,
            level: Optional[int] = None) -> JGadget:
    """J-gadget for ``min_x rank(A + x B)``.

    ``A`` may itself be a family (as in the iterated construction); its terms
    are carried over zero-padded ahead of the new ones. ``decomposition``
    overrides the default pivot-rule splitting of ``B`` into rank-one terms.
    """
    base = A if isinstance(A, AffineMatrixFamily) else AffineMatrixFamily(A)
    f = base.field
    n, m = base.shape
    if B.shape != (n, m):
        raise ValueError(f"B has shape {B.shape}, expected {(n, m)}")
    if decomposition is None:
        decomp = rank_one_decompose(B)
    else:
        decomp = [(tuple(f(x) for x in v), tuple(f(x) for x in w)) for v, w in decomposition]
        total = Matrix.zeros(f, n, m)
        for v, w in decomp:
            total = total + Matrix.outer(f, v, w)
        if total != B:
            raise ValueError("decomposition does not sum to B")
    r = len(decomp)
    if r == 0:
        raise ValueError("B = 0 has no J-gadget; drop the term instead")

    pairs = tuple(combinations(range(1, r + 1), 2))
    rows, cols = n + len(pairs), m + 2 * len(pairs)
    xs, ys, zs = _names(level, r)
    one, neg_one = f.one, f.neg(f.one)

    def slot(i: int, pair: Pair) -> int:
        # column of C_{pair} that carries v_i
        return m + 2 * pairs.index(pair) + (0 if pair[0] == i else 1)

    def place(entries: List, col: int, v: Sequence, scale=one) -> None:
        for row, a in enumerate(v):
            if a != 0:
                entries[row * cols + col] = f.add(entries[row * cols + col], f.mul(scale, a))

    terms: List[Tuple[str, Matrix]] = [(name, c.padded(rows, cols)) for name, c in base.terms]
    for i, (v, w) in enumerate(decomp, start=1):
        e = list(Matrix.outer(f, v, w).padded(rows, cols).entries)
        for pair in pairs:
            if i in pair:
                place(e, slot(i, pair), v, neg_one)
        terms.append((xs[i - 1], Matrix(f, rows, cols, tuple(e))))
    for (i, j), name in sorted(ys.items()):
        pair = (min(i, j), max(i, j))
        e = [f.zero] * (rows * cols)
        col = slot(i, pair)
        place(e, col, decomp[i - 1][0])
        e[(n + pairs.index(pair)) * cols + col] = one
        terms.append((name, Matrix(f, rows, cols, tuple(e))))
    for pair, name in sorted(zs.items()):
        e = [f.zero] * (rows * cols)
        d = n + pairs.index(pair)
        e[d * cols + slot(pair[0], pair)] = neg_one
        e[d * cols + slot(pair[1], pair)] = neg_one
        terms.append((name, Matrix(f, rows, cols, tuple(e))))

    family = AffineMatrixFamily(base.base.padded(rows, cols), tuple(terms))
    return JGadget(family, tuple(decomp), n, m, tuple(xs), ys, zs, pairs)


def _recover_index(x: Sequence, y: Mapping[Pair, Any], z: Mapping[Pair, Any]) -> int:
    r = len(x)
    Z = set()
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            if i == j:
                continue
            zij = z[(min(i, j), max(i, j))]
            if y[(i, j)] != zij or x[i - 1] != y[(i, j)]:
                Z.add(i)
                break
    outside = [j for j in range(1, r + 1) if j not in Z]
    return outside[0] if outside else 1


def _recover_from_names(a: Mapping[str, Any], xs, ys, zs, field=None):
    conv = (lambda t: t) if field is None else field
    x = [conv(a[v]) for v in xs]
    y = {k: conv(a[v]) for k, v in ys.items()}
    z = {k: conv(a[v]) for k, v in zs.items()}
    return x[_recover_index(x, y, z) - 1]


def recover_x(g: JGadget, a: Mapping[str, Any]):
    """Scalar ``x`` with ``rank J(a) >= rank(A + x B)``.

    Let ``Z`` be the indices ``i`` with ``y_ij != z_ij`` or ``x_i != y_ij`` for
    some ``j``; take the smallest ``j`` outside ``Z`` (or ``j = 1`` when ``Z``
    is everything) and return ``a[x_j]``.
    """
    return _recover_from_names(a, g.x_vars, g.y_vars, g.z_vars, g.family.field)


def recover_x_batch(g: JGadget, values: np.ndarray, variables: Sequence[str]) -> np.ndarray:
    """Vectorized :func:`recover_x` over rows of integer ``values`` (GF(p) only)."""
    col = {v: k for k, v in enumerate(variables)}
    r = g.r
    vals = np.asarray(values)
    N = vals.shape[0]
    X = np.stack([vals[:, col[v]] for v in g.x_vars], axis=1) if r else np.zeros((N, 0), int)
    in_Z = np.zeros((N, r), dtype=bool)
    for (i, j), yname in g.y_vars.items():
        y = vals[:, col[yname]]
        z = vals[:, col[g.z(i, j)]]
        in_Z[:, i - 1] |= (y != z) | (X[:, i - 1] != y)
    outside = ~in_Z
    has = outside.any(axis=1)
    j = np.where(has, outside.argmax(axis=1), 0)
    return X[np.arange(N), j]


def reduce_rm_to_1rm(fam: AffineMatrixFamily, *,
                     decompositions: Optional[Mapping[str, Sequence]] = None
                     ) -> Tuple[AffineMatrixFamily, Certificate]:
    """Replace every term by its J-gadget, nesting in input order.

    Zero coefficients are dropped (their variables pull back to 0). Level ``L``
    variables are named ``x.L.i``, ``y.L.i.j``, ``z.L.i.j`` where ``L`` is the
    1-based position of the source term.
    """
    decompositions = decompositions or {}
    current = AffineMatrixFamily(fam.base)
    levels, dropped = [], []
    for level, (var, B) in enumerate(fam.terms, start=1):
        if B.is_zero():
            dropped.append(var)
            continue
        n, m = current.shape
        g = build_j(current, B.padded(n, m), level=level,
                    decomposition=_padded_decomp(decompositions.get(var), n, m, fam))
        current = g.family
        levels.append(g.pullback_data(var))
    cert = Certificate("rm_to_1rm", 0, {"levels": levels, "dropped": dropped,
                                        "field": fam.field.tag()})
    return current, cert


def _padded_decomp(decomp, n, m, fam):
    if decomp is None:
        return None
    z = fam.field.zero
    return [(tuple(v) + (z,) * (n - len(v)), tuple(w) + (z,) * (m - len(w))) for v, w in decomp]


@register_pullback("rm_to_1rm")
def _pull_rm_to_1rm(data, a):
    from ..fields import field_from_tag
    f = field_from_tag(data["field"])
    out = {v: f.zero for v in data["dropped"]}
    for lvl in data["levels"]:
        ys = {(i, j): v for i, j, v in lvl["y"]}
        zs = {(i, j): v for i, j, v in lvl["z"]}
        out[lvl["source"]] = _recover_from_names(a, lvl["x"], ys, zs, f)
    return out


def g_type_columns_ok(g: JGadget) -> bool:
    """Each y-coefficient has one nonzero column, each z-coefficient one nonzero row."""
    ok = True
    for name in g.y_vars.values():
        ok &= len(g.family.coeff(name).nonzero_cols()) == 1
    for name in g.z_vars.values():
        ok &= len(g.family.coeff(name).nonzero_rows()) == 1
    return ok


def gadget_shape(n: int, m: int, r: int) -> Tuple[int, int]:
    return (n + r * (r - 1) // 2, m + r * (r - 1))


def constant_assignment(g: JGadget, x) -> Dict[str, Any]:
    """All gadget variables set to ``x``; evaluates to ``[[A + xB, 0], [0, 0]]``."""
    return {v: x for v in (*g.x_vars, *g.y_vars.values(), *g.z_vars.values())}


__all__ = [
    "JGadget", "build_j", "recover_x", "recover_x_batch", "reduce_rm_to_1rm",
    "constant_assignment", "gadget_shape", "g_type_columns_ok",
]
