"""Rank-one rank minimization to low-rank matrix completion by bordering.

For a rank-one term ``x v w^t`` the two borderings

    column:  A' = [[A, 0], [w^t, -1]],   B' = [[0, v], [0, 0]]
    row:     A'' = [[A, v], [0, -1]],    B'' = [[0, 0], [w^t, 0]]

raise the rank of every member of the family by exactly one while pushing
the term into a single new column (resp. row). A term whose coefficient has
one nonzero row needs only the column step, one nonzero column only the row
step, and a general term needs both before it is a single unknown cell.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..algebra import Matrix, Vector, rank, rank_one_decompose, unit_vector
from ..instances import (AffineMatrixFamily, Certificate, PartialMatrix, Unknown,
                         register_pullback)
from ..fields import field_from_tag


class NotRankOne(ValueError):
    pass


def _factors(B: Matrix) -> Tuple[Vector, Vector]:
    f = B.field
    if rank(B) != 1:
        raise NotRankOne(f"coefficient has rank {rank(B)}, expected 1")
    rows, cols = B.nonzero_rows(), B.nonzero_cols()
    if len(rows) == 1:
        return unit_vector(f, B.rows, rows[0]), B.row(rows[0])
    if len(cols) == 1:
        return B.col(cols[0]), unit_vector(f, B.cols, cols[0])
    return rank_one_decompose(B)[0]


def _border(fam: AffineMatrixFamily, term_index: int, v: Sequence, w: Sequence,
            kind: str) -> AffineMatrixFamily:
    f = fam.field
    n, m = fam.shape
    var, B = fam.terms[term_index]
    if Matrix.outer(f, v, w) != B:
        raise ValueError("v w^t does not equal the selected coefficient")
    base = list(fam.base.padded(n + 1, m + 1).entries)
    base[n * (m + 1) + m] = f.neg(f.one)
    new = [f.zero] * ((n + 1) * (m + 1))
    if kind == "column":
        for j, x in enumerate(w):
            base[n * (m + 1) + j] = x
        for i, x in enumerate(v):
            new[i * (m + 1) + m] = x
    else:
        for i, x in enumerate(v):
            base[i * (m + 1) + m] = x
        for j, x in enumerate(w):
            new[n * (m + 1) + j] = x
    terms = []
    for k, (name, c) in enumerate(fam.terms):
        if k == term_index:
            terms.append((name, Matrix(f, n + 1, m + 1, tuple(new))))
        else:
            terms.append((name, c.padded(n + 1, m + 1)))
    return AffineMatrixFamily(Matrix(f, n + 1, m + 1, tuple(base)), tuple(terms))


def border_column(fam: AffineMatrixFamily, term_index: int,
                  decomposition: Optional[Tuple[Sequence, Sequence]] = None) -> AffineMatrixFamily:
    """Append the row ``(w^t, -1)`` and move the term to ``(v; 0)`` in the new column."""
    B = fam.terms[term_index][1]
    v, w = decomposition if decomposition is not None else _factors(B)
    f = fam.field
    return _border(fam, term_index, tuple(map(f, v)), tuple(map(f, w)), "column")


def border_row(fam: AffineMatrixFamily, term_index: int,
               decomposition: Optional[Tuple[Sequence, Sequence]] = None) -> AffineMatrixFamily:
    """Append the column ``(v; -1)`` and move the term to ``(w^t, 0)`` in the new row.

    The default factors are those :func:`border_column` would pick for the
    transposed coefficient, so ``border_row(F) == border_column(F^t)^t``.
    """
    B = fam.terms[term_index][1]
    if decomposition is None:
        wt, vt = _factors(B.T)
        v, w = vt, wt
    else:
        v, w = decomposition
    f = fam.field
    return _border(fam, term_index, tuple(map(f, v)), tuple(map(f, w)), "row")


def steps_needed(B: Matrix) -> int:
    """0 for a single entry, 1 for one nonzero row or column, else 2."""
    rows, cols = B.nonzero_rows(), B.nonzero_cols()
    if len(rows) == 1 and len(cols) == 1:
        return 0
    if len(rows) == 1 or len(cols) == 1:
        return 1
    return 2


def reduce_1rm_to_lrmc(fam: AffineMatrixFamily) -> Tuple[PartialMatrix, Certificate]:
    """Border each term until it is a single unknown cell.

    Terms are handled in input order. A term that already has a single
    nonzero entry keeps its cell unless an earlier term claimed that cell, in
    which case it is bordered like a one-row term. Unknowns carry the source
    variable names; a cell value ``u`` pulls back to ``(u - base) / coeff``.
    """
    f = fam.field
    for name, B in fam.terms:
        if rank(B) != 1:
            raise NotRankOne(f"term {name!r} has rank {rank(B)}")
    steps = 0
    claimed: Dict[Tuple[int, int], str] = {}
    cur = fam
    for k, (name, B) in enumerate(fam.terms):
        need = steps_needed(B)
        if need == 0:
            (cell,) = B.nonzero_positions()
            if cell not in claimed:
                claimed[cell] = name
                continue
            need = 1
        if need == 2:
            cur = border_column(cur, k)
            cur = border_row(cur, k)
        elif len(B.nonzero_rows()) == 1:
            cur = border_column(cur, k)
        else:
            cur = border_row(cur, k)
        steps += need
        (cell,) = cur.terms[k][1].nonzero_positions()
        claimed[cell] = name

    n, m = cur.shape
    cells: List[Any] = list(cur.base.entries)
    pull = {}
    for (i, j), name in claimed.items():
        coeff = cur.coeff(name)[i, j]
        base = cur.base[i, j]
        cells[i * m + j] = Unknown(name)
        pull[name] = [name, f.to_json(base), f.to_json(coeff)]
    P = PartialMatrix(f, n, m, tuple(cells))
    cert = Certificate("lrmc", steps, {"cells": pull, "field": f.tag()})
    return P, cert


@register_pullback("lrmc")
def _pull_lrmc(data, a):
    f = field_from_tag(data["field"])
    out = {}
    for var, (cell, base, coeff) in data["cells"].items():
        out[var] = f.div(f.sub(f(a[cell]), f(base)), f(coeff))
    return out


__all__ = ["NotRankOne", "border_column", "border_row", "steps_needed",
           "reduce_1rm_to_lrmc"]
