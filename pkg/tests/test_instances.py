from __future__ import annotations

import json

import pytest

from rankred.algebra import Matrix, Tensor, rank
from rankred.fields import GF, QQ
from rankred.instances import (AffineMatrixFamily, Certificate, PartialMatrix, TRInstance,
                               Unknown, compose, evaluate, lrmc_as_1rm, validate_1rm)
from rankred.reductions.rm_to_1rm import build_j, constant_assignment


def test_evaluate_zero_assignment_is_base():
    f = GF(5)
    fam = AffineMatrixFamily(Matrix.identity(f, 2), (("x", Matrix.identity(f, 2)),))
    assert evaluate(fam, {"x": 0}) == fam.base


def test_evaluate_single_entry_update():
    f = GF(7)
    A = Matrix.from_rows(f, [[1, 2], [3, 4]])
    fam = AffineMatrixFamily(A, (("x", Matrix.unit(f, 2, 2, 0, 0)),))
    assert fam.evaluate({"x": 5}).tolist() == [[6, 2], [3, 4]]


def test_constant_assignment_gives_block_matrix():
    f = QQ
    A = Matrix.from_rows(f, [[0, 1], [-1, 0]])
    B = Matrix.identity(f, 2)
    g = build_j(A, B)
    for x in (0, 3, -2):
        expected = (A + B.scale(x)).padded(3, 4)
        assert g.family.evaluate(constant_assignment(g, f(x))) == expected


def test_family_validation():
    f = QQ
    with pytest.raises(ValueError):
        AffineMatrixFamily(Matrix.identity(f, 2), (("x", Matrix.identity(f, 3)),))
    with pytest.raises(ValueError):
        AffineMatrixFamily(Matrix.identity(f, 2),
                           (("x", Matrix.identity(f, 2)), ("x", Matrix.identity(f, 2))))
    with pytest.raises(ValueError):
        AffineMatrixFamily(Matrix.identity(f, 2), (("x", Matrix.identity(GF(3), 2)),))


def test_lrmc_as_1rm_single_unknown():
    f = QQ
    P = PartialMatrix.from_rows(f, [[1, 0, 0], [0, 1, Unknown("u")], [2, 3, -1]])
    fam = lrmc_as_1rm(P)
    assert fam.base.tolist() == [[1, 0, 0], [0, 1, 0], [2, 3, -1]]
    assert fam.variables == ("u",)
    assert fam.coeff("u") == Matrix.unit(f, 3, 3, 1, 2)
    assert validate_1rm(fam)


def test_lrmc_as_1rm_counts():
    f = GF(3)
    P = PartialMatrix.from_rows(f, [[Unknown("a"), 1], [Unknown("b"), Unknown("c")]])
    fam = lrmc_as_1rm(P)
    assert len(fam.terms) == 3 and all(rank(c) == 1 for _, c in fam.terms)
    full = PartialMatrix.from_rows(f, [[1, 2], [0, 1]])
    assert lrmc_as_1rm(full).terms == ()


def test_validate_1rm_rejects_rank_two():
    f = QQ
    fam = AffineMatrixFamily(Matrix.zeros(f, 2, 2), (("x", Matrix.identity(f, 2)),))
    assert not validate_1rm(fam)


def test_partial_matrix_rules():
    f = QQ
    with pytest.raises(ValueError):
        PartialMatrix.from_rows(f, [[Unknown("a"), Unknown("a")]])
    P = PartialMatrix.from_rows(f, [[1, Unknown("a")], [2, 4]])
    assert P.unknowns() == ["a"]
    assert P.unknown_positions() == {"a": (0, 1)}
    assert rank(P.complete({"a": 2})) == 1
    assert P.known_rank_bound() == 1
    assert str(P) == "1 ?\n2 4"


def test_tr_instance_needs_order_two():
    with pytest.raises(ValueError):
        TRInstance(Tensor(QQ, (3,), (QQ(1),) * 3))


def test_certificate_json_roundtrip_and_chain():
    c1 = Certificate("identity", 2, {"note": 1})
    c2 = Certificate("identity", 3)
    chain = compose(c1, c2)
    assert chain.offset == 5
    back = Certificate.from_json(json.loads(json.dumps(chain.to_json())))
    assert back == chain
    assert back.pull({"x": 1}) == {"x": 1}


def test_unknown_certificate_kind():
    with pytest.raises(ValueError):
        Certificate("no-such-kind", 0).pull({})
