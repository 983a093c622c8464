from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rankred.algebra import Matrix, PureTensor, Tensor
from rankred.fields import GF, QQ
from rankred.instances import AffineMatrixFamily, PartialMatrix, Unknown
from rankred.serialize import (SchemaError, canonical, certificate_from_json, digest,
                               dump_instance, load_instance, parse_field, witness_to_json)

from helpers import field_and_matrix, fields, tensors


def test_load_rm_instance():
    obj = {"kind": "rm", "field": "Q", "base": [[0, "1/2"], [-1, 0]],
           "terms": [{"var": "x", "coeff": [[1, 0], [0, 1]]}]}
    kind, fam = load_instance(obj)
    assert kind == "rm"
    assert fam.base.tolist() == [[0, Fraction(1, 2)], [-1, 0]]
    assert dump_instance(fam) == obj


def test_bare_question_marks_get_position_names():
    obj = {"kind": "lrmc", "field": {"p": 7}, "matrix": [[1, "?"], ["?b", 2]]}
    _, P = load_instance(obj)
    assert P.unknown_positions() == {"c.1.2": (0, 1), "b": (1, 0)}
    assert dump_instance(P)["matrix"] == [[1, "?c.1.2"], ["?b", 2]]


def test_field_override_and_wrapper():
    obj = {"instance": {"kind": "matrix", "field": "Q", "matrix": [[3, 6]]}}
    _, M = load_instance(obj, GF(5))
    assert M.field == GF(5) and M.tolist() == [[3, 1]]


@pytest.mark.parametrize("obj,path", [
    ({"field": "Q"}, "$.kind"),
    ({"kind": "xyz", "field": "Q"}, "$.kind"),
    ({"kind": "matrix", "field": {"p": 4}, "matrix": [[1]]}, "$.field"),
    ({"kind": "matrix", "field": "Q", "matrix": [[1, 2], [3]]}, "$.matrix[1]"),
    ({"kind": "matrix", "field": "Q", "matrix": [[1, True]]}, "$.matrix[0][1]"),
    ({"kind": "matrix", "field": "Q", "matrix": []}, "$.matrix"),
    ({"kind": "rm", "field": "Q", "base": [[1, 2]],
      "terms": [{"var": "x", "coeff": [[1]]}]}, "$.terms[0].coeff"),
    ({"kind": "rm", "field": "Q", "base": [[1]], "terms": [{"coeff": [[1]]}]}, "$.terms[0].var"),
    ({"kind": "tr", "field": "Q", "tensor": {"shape": [2], "entries": [1, 2]}}, "$.tensor.shape"),
    ({"kind": "tr", "field": "Q", "tensor": {"shape": [2, 2], "entries": [1]}}, "$.tensor"),
    ({"kind": "lrmc", "field": "Q", "matrix": [["?a", "?a"]]}, "$.matrix"),
    ({"kind": "matrix", "field": {"p": 3}, "matrix": [["1/3"]]}, "$.matrix[0][0]"),
])
def test_schema_errors_carry_paths(obj, path):
    with pytest.raises(SchemaError) as info:
        load_instance(obj)
    assert info.value.path == path


def test_parse_field():
    assert parse_field("Q") == QQ
    assert parse_field({"p": 3}) == GF(3)
    with pytest.raises(SchemaError):
        parse_field("R")


@given(field_and_matrix())
def test_matrix_roundtrip(fm):
    _, M = fm
    assert load_instance(dump_instance(M))[1] == M


@given(st.data())
def test_tensor_roundtrip(data):
    f = data.draw(fields())
    T = data.draw(tensors(f, (2, 1, 3)))
    assert load_instance(dump_instance(T))[1] == T


def test_partial_and_family_roundtrip():
    f = GF(5)
    P = PartialMatrix.from_rows(f, [[1, Unknown("u")], [Unknown("v"), 3]])
    assert load_instance(dump_instance(P))[1] == P
    fam = AffineMatrixFamily(Matrix.identity(f, 2), (("a", Matrix.unit(f, 2, 2, 0, 1)),))
    assert load_instance(dump_instance(fam))[1] == fam
    with pytest.raises(TypeError):
        dump_instance("not an instance")


def test_witness_to_json_forms():
    f = QQ
    assert witness_to_json(f, {"b": Fraction(1, 2), "a": 3}) == {"a": 3, "b": "1/2"}
    P = PureTensor.of(f, (1, 0), (0, 2))
    T = Tensor.outer(f, (1, 1), (1, 0))
    assert witness_to_json(f, [P, T]) == [[[1, 0], [0, 2]],
                                          {"shape": [2, 2], "entries": [1, 0, 1, 0]}]


def test_certificate_parsing():
    cert = certificate_from_json({"kind": "identity", "offset": 2})
    assert cert.offset == 2
    with pytest.raises(SchemaError):
        certificate_from_json({"offset": 1})


def test_digest_is_order_independent():
    assert canonical({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
    assert digest({"a": 1, "b": 2}) == digest({"b": 2, "a": 1})
    assert len(digest({})) == 16
