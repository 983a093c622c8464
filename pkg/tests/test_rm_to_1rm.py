from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankred.algebra import Matrix, rank
from rankred.fields import GF, QQ
from rankred.instances import AffineMatrixFamily, validate_1rm
from rankred.oracles import enumerate_ranks, min_rank_exhaustive, odometer
from rankred.reductions.rm_to_1rm import (build_j, constant_assignment, g_type_columns_ok,
                                          gadget_shape, recover_x, recover_x_batch,
                                          reduce_rm_to_1rm)

from helpers import display_grid, family_grid, matrices, prime_fields

ROTATION_J = [
    "x.1 1 y.1.2-x.1 0",
    "-1 x.2 0 y.2.1-x.2",
    "0 0 y.1.2-z.1.2 y.2.1-z.1.2",
]

TRIANGULAR_J = [
    "x.1 3 4 y.1.2-x.1 0 y.1.3-x.1 0 0 0",
    "2x.1 x.2 5 2y.1.2-2x.1 y.2.1-x.2 2y.1.3-2x.1 0 y.2.3-x.2 0",
    "3x.1 2x.2 x.3 3y.1.2-3x.1 2y.2.1-2x.2 3y.1.3-3x.1 y.3.1-x.3 2y.2.3-2x.2 y.3.2-x.3",
    "0 0 0 y.1.2-z.1.2 y.2.1-z.1.2 0 0 0 0",
    "0 0 0 0 0 y.1.3-z.1.3 y.3.1-z.1.3 0 0",
    "0 0 0 0 0 0 0 y.2.3-z.2.3 y.3.2-z.2.3",
]

SKEW_J3 = [
    "-1 x.1.1 x.2.1 y.1.1.2-x.1.1 0 y.2.1.2-x.2.1 0 0 0",
    "-x.1.2 -1 x.3.1 0 y.1.2.1-x.1.2 0 0 y.3.1.2-x.3.1 0",
    "-x.2.2 -x.3.2 -1 0 0 0 y.2.2.1-x.2.2 0 y.3.2.1-x.3.2",
    "0 0 0 y.1.1.2-z.1.1.2 y.1.2.1-z.1.1.2 0 0 0 0",
    "0 0 0 0 0 y.2.1.2-z.2.1.2 y.2.2.1-z.2.1.2 0 0",
    "0 0 0 0 0 0 0 y.3.1.2-z.3.1.2 y.3.2.1-z.3.1.2",
]


def _rename(grid, mapping):
    return [[{mapping.get(k, k): v for k, v in cell.items()} for cell in row] for row in grid]


def test_rotation_example_matches_display():
    f = QQ
    g = build_j(Matrix.from_rows(f, [[0, 1], [-1, 0]]), Matrix.identity(f, 2))
    assert g.family.shape == (3, 4)
    assert family_grid(g.family) == display_grid(ROTATION_J, f)


def test_rotation_example_coefficient_matrices():
    f = QQ
    g = build_j(Matrix.from_rows(f, [[0, 1], [-1, 0]]), Matrix.identity(f, 2))
    coeff = {v: c.tolist() for v, c in g.family.terms}
    assert coeff == {
        "x.1": [[1, 0, -1, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        "x.2": [[0, 0, 0, 0], [0, 1, 0, -1], [0, 0, 0, 0]],
        "y.1.2": [[0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 1, 0]],
        "y.2.1": [[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 1]],
        "z.1.2": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, -1, -1]],
    }
    assert g.family.base.tolist() == [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0]]


def test_triangular_example_matches_display():
    f = QQ
    A = Matrix.from_rows(f, [[0, 3, 4], [0, 0, 5], [0, 0, 0]])
    B = Matrix.from_rows(f, [[1, 0, 0], [2, 1, 0], [3, 2, 1]])
    g = build_j(A, B)
    assert g.family.shape == (6, 9) == gadget_shape(3, 3, 3)
    assert family_grid(g.family) == display_grid(TRIANGULAR_J, f)


def _skew_family(f):
    A = Matrix.identity(f, 3).scale(-1)
    B1 = Matrix.from_rows(f, [[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    B2 = Matrix.from_rows(f, [[0, 0, 1], [0, 0, 0], [-1, 0, 0]])
    B3 = Matrix.from_rows(f, [[0, 0, 0], [0, 0, 1], [0, -1, 0]])
    return AffineMatrixFamily(A, (("x1", B1), ("x2", B2), ("x3", B3)))


SKEW_SPLIT = {
    "x1": [((1, 0, 0), (0, 1, 0)), ((0, 1, 0), (-1, 0, 0))],
    "x2": [((1, 0, 0), (0, 0, 1)), ((0, 0, 1), (-1, 0, 0))],
    "x3": [((0, 1, 0), (0, 0, 1)), ((0, 0, 1), (0, -1, 0))],
}


def test_iterated_skew_example_matches_display():
    f = QQ
    out, cert = reduce_rm_to_1rm(_skew_family(f), decompositions=SKEW_SPLIT)
    assert out.shape == (6, 9)
    assert len(out.variables) == 15
    assert sum(v.startswith("x.") for v in out.variables) == 6
    assert sum(v.startswith("y.") for v in out.variables) == 6
    assert sum(v.startswith("z.") for v in out.variables) == 3
    assert family_grid(out) == display_grid(SKEW_J3, f)
    assert validate_1rm(out)
    assert cert.offset == 0


def test_iterated_skew_default_split_differs_only_by_sign():
    # the pivot rule writes the second term of B1 as (0,-1,0)(1,0,0)^t
    f = QQ
    out, _ = reduce_rm_to_1rm(_skew_family(f))
    grid = family_grid(out)
    assert grid[1][4] == {"y.1.2.1": -1, "x.1.2": 1}
    assert family_grid(out)[:1] == display_grid(SKEW_J3, f)[:1]


def test_decomposition_must_sum_to_b():
    f = QQ
    with pytest.raises(ValueError):
        build_j(Matrix.identity(f, 2), Matrix.identity(f, 2), decomposition=[((1, 0), (1, 0))])
    with pytest.raises(ValueError):
        build_j(Matrix.identity(f, 2), Matrix.zeros(f, 2, 2))


def test_rank_one_term_is_renamed_only():
    f = GF(5)
    B = Matrix.outer(f, (1, 2), (3, 0))
    fam = AffineMatrixFamily(Matrix.identity(f, 2), (("t", B),))
    out, _ = reduce_rm_to_1rm(fam)
    assert out.variables == ("x.1.1",)
    assert out.base == fam.base and out.coeff("x.1.1") == B


def test_empty_family_unchanged():
    f = GF(3)
    fam = AffineMatrixFamily(Matrix.identity(f, 2))
    out, cert = reduce_rm_to_1rm(fam)
    assert out == fam
    assert cert.pull({}) == {}


def test_zero_terms_are_dropped_and_pull_back_to_zero():
    f = GF(3)
    fam = AffineMatrixFamily(Matrix.identity(f, 2), (("z", Matrix.zeros(f, 2, 2)),
                                                      ("x", Matrix.identity(f, 2))))
    out, cert = reduce_rm_to_1rm(fam)
    assert all(v.startswith(("x.2", "y.2", "z.2")) for v in out.variables)
    res = min_rank_exhaustive(out)
    pulled = cert.pull(res.witness)
    assert pulled["z"] == 0
    assert rank(fam.evaluate(pulled)) == res.minimum


def test_recover_x_constant_assignment():
    f = GF(7)
    g = build_j(Matrix.from_rows(f, [[0, 1], [-1, 0]]), Matrix.identity(f, 2))
    for c in range(7):
        assert recover_x(g, constant_assignment(g, c)) == c


def test_recover_x_skips_inconsistent_index():
    f = GF(7)
    g = build_j(Matrix.from_rows(f, [[0, 1], [-1, 0]]), Matrix.identity(f, 2))
    a = {"x.1": 1, "x.2": 4, "y.1.2": 3, "y.2.1": 4, "z.1.2": 4}
    assert recover_x(g, a) == 4
    # nobody consistent: fall back to x_1
    a = {"x.1": 1, "x.2": 2, "y.1.2": 3, "y.2.1": 4, "z.1.2": 5}
    assert recover_x(g, a) == 1


def test_g_and_h_coefficients_are_single_line():
    f = QQ
    A = Matrix.from_rows(f, [[0, 3, 4], [0, 0, 5], [0, 0, 0]])
    B = Matrix.from_rows(f, [[1, 0, 0], [2, 1, 0], [3, 2, 1]])
    g = build_j(A, B)
    assert g_type_columns_ok(g)
    assert validate_1rm(g.family)


def _pointwise_ok(A, B):
    f = A.field
    g = build_j(A, B)
    vs, ranks = enumerate_ranks(g.family)
    xs = recover_x_batch(g, odometer(f.p, len(vs)), vs)
    src = np.array([rank(A + B.scale(x)) for x in range(f.p)])
    return bool(np.all(ranks >= src[xs])) and int(ranks.min()) == int(src.min())


@given(st.data())
def test_pointwise_bound_and_equal_minimum(data):
    f = data.draw(prime_fields((2, 3)))
    n, m = data.draw(st.integers(1, 2)), data.draw(st.integers(1, 3))
    A = data.draw(matrices(f, n, m))
    B = data.draw(matrices(f, n, m))
    if B.is_zero():
        return
    assert _pointwise_ok(A, B)


def test_recover_x_batch_matches_scalar():
    f = GF(3)
    g = build_j(Matrix.from_rows(f, [[1, 2], [0, 1]]), Matrix.identity(f, 2))
    vs = tuple(sorted(g.family.variables))
    digits = odometer(3, len(vs))
    batch = recover_x_batch(g, digits, vs)
    for row, x in zip(digits[::7], batch[::7]):
        assert recover_x(g, dict(zip(vs, (int(v) for v in row)))) == x


def test_output_dimensions_follow_growth_rule():
    f = GF(2)
    fam = AffineMatrixFamily(Matrix.zeros(f, 3, 3), (
        ("a", Matrix.identity(f, 3)), ("b", Matrix.outer(f, (1, 1, 0), (0, 1, 1)))))
    out, _ = reduce_rm_to_1rm(fam)
    n, m = gadget_shape(3, 3, 3)
    assert out.shape == gadget_shape(n, m, 1) == (6, 9)


def test_pullback_follows_levels():
    f = GF(3)
    fam = AffineMatrixFamily(Matrix.from_rows(f, [[1, 0], [0, 0]]), (
        ("a", Matrix.identity(f, 2)), ("b", Matrix.from_rows(f, [[0, 1], [1, 0]]))))
    out, cert = reduce_rm_to_1rm(fam)
    res = min_rank_exhaustive(out)
    src = min_rank_exhaustive(fam)
    assert res.minimum == src.minimum
    assert rank(fam.evaluate(cert.pull(res.witness))) == src.minimum
