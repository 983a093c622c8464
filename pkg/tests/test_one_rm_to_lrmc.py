from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rankred.algebra import Matrix, rank
from rankred.demo import EIGHT_BY_NINE, rotation_family
from rankred.fields import GF, QQ
from rankred.instances import AffineMatrixFamily, Unknown, compose
from rankred.oracles import mrank, mrank_exhaustive
from rankred.reductions.one_rm_to_lrmc import (NotRankOne, border_column, border_row,
                                               reduce_1rm_to_lrmc, steps_needed)
from rankred.reductions.rm_to_1rm import reduce_rm_to_1rm

from helpers import fields, matrices, nonzero_vectors, scalars


def _fam(f, A, B):
    return AffineMatrixFamily(Matrix.from_rows(f, A), (("x", Matrix.from_rows(f, B)),))


def _pattern(P):
    return [["?" if isinstance(P[i, j], Unknown) else P[i, j] for j in range(P.cols)]
            for i in range(P.rows)]


def test_border_column_single_row_term():
    f = QQ
    out = border_column(_fam(f, [[1, 0], [0, 1]], [[0, 0], [2, 3]]), 0)
    assert out.base.tolist() == [[1, 0, 0], [0, 1, 0], [2, 3, -1]]
    assert out.coeff("x") == Matrix.unit(f, 3, 3, 1, 2)


def test_border_column_general_term():
    f = QQ
    out = border_column(_fam(f, [[1, 0], [0, 1]], [[1, 2], [3, 6]]), 0)
    assert out.base.tolist() == [[1, 0, 0], [0, 1, 0], [1, 2, -1]]
    assert out.coeff("x").tolist() == [[0, 0, 1], [0, 0, 3], [0, 0, 0]]


def test_border_row_after_column():
    f = QQ
    out = border_row(border_column(_fam(f, [[1, 0], [0, 1]], [[1, 2], [3, 6]]), 0), 0)
    assert out.base.tolist() == [[1, 0, 0, 1], [0, 1, 0, 3], [1, 2, -1, 0], [0, 0, 0, -1]]
    assert out.coeff("x") == Matrix.unit(f, 4, 4, 3, 2)


def test_steps_needed():
    f = QQ
    assert steps_needed(Matrix.unit(f, 2, 2, 1, 1)) == 0
    assert steps_needed(Matrix.from_rows(f, [[0, 0], [2, 3]])) == 1
    assert steps_needed(Matrix.from_rows(f, [[1, 0], [3, 0]])) == 1
    assert steps_needed(Matrix.from_rows(f, [[1, 2], [3, 6]])) == 2


def test_single_row_example_end_to_end():
    f = QQ
    P, cert = reduce_1rm_to_lrmc(_fam(f, [[1, 0], [0, 1]], [[0, 0], [2, 3]]))
    assert _pattern(P) == [[1, 0, 0], [0, 1, "?"], [2, 3, -1]]
    assert cert.offset == 1
    assert rank(P.complete({"x": Fraction(-1, 3)})) == 2 == P.known_rank_bound()
    assert cert.pull({"x": Fraction(-1, 3)}) == {"x": Fraction(-1, 3)}


def test_general_rank_one_example_end_to_end():
    f = QQ
    P, cert = reduce_1rm_to_lrmc(_fam(f, [[1, 0], [0, 1]], [[1, 2], [3, 6]]))
    assert _pattern(P) == [[1, 0, 0, 1], [0, 1, 0, 3], [1, 2, -1, 0], [0, 0, "?", -1]]
    assert cert.offset == 2
    assert rank(P.complete({"x": Fraction(-1, 7)})) == 3 == P.known_rank_bound()


@pytest.mark.parametrize("p,fill", [(7, "-1/3"), (11, "-1/3")])
def test_single_row_example_over_prime_fields(p, fill):
    f = GF(p)
    P, _ = reduce_1rm_to_lrmc(_fam(f, [[1, 0], [0, 1]], [[0, 0], [2, 3]]))
    res = mrank_exhaustive(P)
    assert (res.minimum, res.witness) == (2, {"x": f(fill)})


def test_chained_rotation_layout_and_offsets():
    f = QQ
    F, c1 = reduce_rm_to_1rm(rotation_family(f))
    P, c2 = reduce_1rm_to_lrmc(F)
    expected = [["?" if x == "?" else f(x) for x in r] for r in EIGHT_BY_NINE]
    assert _pattern(P) == expected
    assert len(P.unknowns()) == 5
    assert compose(c1, c2).offset == 5


def test_eight_by_nine_claimed_cells():
    # x.1.1 and x.1.2 keep their diagonal cells; the G/H terms are bordered
    F, _ = reduce_rm_to_1rm(rotation_family(QQ))
    P, _ = reduce_1rm_to_lrmc(F)
    pos = P.unknown_positions()
    assert pos["x.1.1"] == (0, 4) and pos["x.1.2"] == (1, 5)


@pytest.mark.parametrize("p,expected", [(3, 7), (5, 6)])
def test_eight_by_nine_mrank_tracks_square_root_of_minus_one(p, expected):
    f = GF(p)
    fam = rotation_family(f)
    F, c1 = reduce_rm_to_1rm(fam)
    P, c2 = reduce_1rm_to_lrmc(F)
    res = mrank(P)
    assert res.minimum == expected
    x = compose(c1, c2).pull(res.witness)["x"]
    assert rank(fam.evaluate({"x": x})) == expected - 5


def test_rejects_higher_rank_terms():
    with pytest.raises(NotRankOne):
        reduce_1rm_to_lrmc(_fam(QQ, [[1, 0], [0, 1]], [[1, 0], [0, 1]]))


def test_claimed_cell_is_bordered():
    f = GF(5)
    E = Matrix.unit(f, 2, 2, 0, 0)
    fam = AffineMatrixFamily(Matrix.identity(f, 2), (("a", E), ("b", E.scale(2))))
    P, cert = reduce_1rm_to_lrmc(fam)
    assert cert.offset == 1 and len(P.unknowns()) == 2
    res = mrank(P)
    pulled = cert.pull(res.witness)
    assert rank(fam.evaluate(pulled)) == res.minimum - 1


@st.composite
def rank_one_instance(draw):
    f = draw(fields())
    n, m = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    A = draw(matrices(f, n, m))
    B = Matrix.outer(f, draw(nonzero_vectors(f, n)), draw(nonzero_vectors(f, m)))
    return f, AffineMatrixFamily(A, (("x", B),))


@given(rank_one_instance(), st.data())
def test_bordering_raises_every_rank_by_one(inst, data):
    f, fam = inst
    xs = list(f.elements()) if f != QQ else [data.draw(scalars(f)) for _ in range(5)]
    col = border_column(fam, 0)
    row = border_row(fam, 0)
    for x in xs:
        r = rank(fam.evaluate({"x": x}))
        assert rank(col.evaluate({"x": x})) == r + 1
        assert rank(row.evaluate({"x": x})) == r + 1


@given(rank_one_instance())
def test_border_row_is_transposed_border_column(inst):
    _, fam = inst
    assert border_row(fam, 0) == border_column(fam.transpose(), 0).transpose()


@given(rank_one_instance(), st.data())
def test_completion_shift_is_pointwise(inst, data):
    f, fam = inst
    P, cert = reduce_1rm_to_lrmc(fam)
    (u,) = P.unknowns()
    _, base, coeff = cert.data["cells"][u]
    for _ in range(3):
        x = f(data.draw(scalars(f)))
        fill = f.add(f(base), f.mul(f(coeff), x))
        assert cert.pull({u: fill}) == {"x": x}
        assert rank(P.complete({u: fill})) == rank(fam.evaluate({"x": x})) + cert.offset
