"""Shared strategies and a small parser for linear-form matrix displays."""

from __future__ import annotations

import re
from typing import Dict, List, Mapping, Optional, Sequence

from hypothesis import strategies as st

from rankred.algebra import Matrix, Tensor
from rankred.fields import GF, QQ, Field
from rankred.instances import AffineMatrixFamily

SMALL_PRIMES = (2, 3, 5, 7)

_TERM = re.compile(r"([+-]?)(\d*)([a-z][a-z0-9.]*)?")


def parse_form(token: str, field: Field, subs: Optional[Mapping[str, Dict]] = None) -> Dict:
    """``"2y.1.2-2x.1"`` -> ``{"y.1.2": 2, "x.1": -2}``; key ``"1"`` is the constant."""
    subs = subs or {}
    out: Dict = {}
    for term in re.findall(r"[+-]?[^+-]+", token):
        m = _TERM.fullmatch(term)
        assert m, f"bad term {term!r} in {token!r}"
        sign, num, var = m.groups()
        c = field(int(num) if num else 1)
        if sign == "-":
            c = field.neg(c)
        parts = subs.get(var, {var: field.one}) if var else {"1": field.one}
        for k, v in parts.items():
            out[k] = field.add(out.get(k, field.zero), field.mul(c, v))
    return {k: v for k, v in out.items() if v != 0}


def display_grid(rows: Sequence[str], field: Field,
                 subs: Optional[Mapping[str, Dict]] = None) -> List[List[Dict]]:
    return [[parse_form(tok, field, subs) for tok in r.split()] for r in rows]


def family_grid(fam: AffineMatrixFamily) -> List[List[Dict]]:
    """Each cell of the family as a linear form in its variables."""
    f = fam.field
    n, m = fam.shape
    grid = [[{} for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            if fam.base[i, j] != 0:
                grid[i][j]["1"] = fam.base[i, j]
            for v, c in fam.terms:
                if c[i, j] != 0:
                    grid[i][j][v] = c[i, j]
    return grid


def fields():
    return st.sampled_from([GF(p) for p in SMALL_PRIMES] + [QQ])


def prime_fields(primes: Sequence[int] = SMALL_PRIMES):
    return st.sampled_from([GF(p) for p in primes])


def scalars(f: Field):
    if f == QQ:
        return st.fractions(min_value=-5, max_value=5, max_denominator=4)
    return st.integers(0, f.p - 1)


@st.composite
def matrices(draw, f: Field, n: Optional[int] = None, m: Optional[int] = None,
             max_dim: int = 4) -> Matrix:
    n = n if n is not None else draw(st.integers(1, max_dim))
    m = m if m is not None else draw(st.integers(1, max_dim))
    return Matrix(f, n, m, tuple(draw(st.lists(scalars(f), min_size=n * m, max_size=n * m))))


@st.composite
def field_and_matrix(draw, max_dim: int = 4):
    f = draw(fields())
    return f, draw(matrices(f, max_dim=max_dim))


@st.composite
def nonzero_vectors(draw, f: Field, n: int):
    v = draw(st.lists(scalars(f), min_size=n, max_size=n))
    if all(x == 0 for x in v):
        v[draw(st.integers(0, n - 1))] = f.one
    return tuple(f(x) for x in v)


@st.composite
def tensors(draw, f: Field, shape: Sequence[int]) -> Tensor:
    size = 1
    for n in shape:
        size *= n
    return Tensor(f, tuple(shape), tuple(f(x) for x in
                                         draw(st.lists(scalars(f), min_size=size, max_size=size))))
