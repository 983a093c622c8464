"""JSON interchange for instances, witnesses and certificates.

Instances are objects with a ``kind`` and a ``field`` tag:

* ``{"kind": "rm", "base": [[...]], "terms": [{"var": "x", "coeff": [[...]]}]}``
* ``{"kind": "lrmc", "matrix": [[1, "?", "?b"], ...]}``
* ``{"kind": "tr", "tensor": {"shape": [2, 2, 2], "entries": [...]}}``
* ``{"kind": "matrix", "matrix": [[...]]}``

The field tag is ``{"p": 5}`` or ``"Q"``; rationals are written ``"a/b"``.
A bare ``"?"`` cell is named ``c.i.j`` (1-based) on load.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .algebra import Matrix, PureTensor, Tensor
from .fields import Field, field_from_tag
from .instances import AffineMatrixFamily, Certificate, PartialMatrix, Unknown

Instance = Union[AffineMatrixFamily, PartialMatrix, Tensor, Matrix]

KINDS = ("rm", "lrmc", "tr", "matrix")


class SchemaError(ValueError):
    """Malformed input; ``path`` locates the offending object (``$.terms[0]``)."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _get(obj: Mapping, key: str, path: str) -> Any:
    if not isinstance(obj, Mapping):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing")
    return obj[key]


def parse_field(tag: Any, path: str = "$.field") -> Field:
    try:
        return field_from_tag(tag)
    except (ValueError, TypeError, KeyError) as exc:
        raise SchemaError(path, str(exc)) from None


def _scalar(field: Field, x: Any, path: str):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SchemaError(path, f"expected an integer or 'a/b' string, got {x!r}")
    try:
        return field(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise SchemaError(path, str(exc)) from None


def _rows(obj: Any, path: str) -> List[List[Any]]:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(path, "expected a non-empty array of arrays")
    width = len(obj[0])
    if width == 0:
        raise SchemaError(path, "rows must be non-empty")
    for i, r in enumerate(obj):
        if len(r) != width:
            raise SchemaError(f"{path}[{i}]", f"row has {len(r)} entries, expected {width}")
    return obj


def matrix_from_json(field: Field, obj: Any, path: str = "$.matrix") -> Matrix:
    rows = _rows(obj, path)
    return Matrix.from_rows(field, [[_scalar(field, x, f"{path}[{i}][{j}]")
                                     for j, x in enumerate(r)] for i, r in enumerate(rows)])


def matrix_to_json(M: Matrix) -> List[List[Any]]:
    f = M.field
    return [[f.to_json(x) for x in M.row(i)] for i in range(M.rows)]


def partial_from_json(field: Field, obj: Any, path: str = "$.matrix") -> PartialMatrix:
    rows = _rows(obj, path)
    cells: List[List[Any]] = []
    for i, r in enumerate(rows):
        out = []
        for j, x in enumerate(r):
            if isinstance(x, str) and x.startswith("?"):
                out.append(Unknown(x[1:] or f"c.{i + 1}.{j + 1}"))
            else:
                out.append(_scalar(field, x, f"{path}[{i}][{j}]"))
        cells.append(out)
    try:
        return PartialMatrix.from_rows(field, cells)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def partial_to_json(P: PartialMatrix) -> List[List[Any]]:
    f = P.field
    return [["?" + c.name if isinstance(c, Unknown) else f.to_json(c)
             for c in (P[i, j] for j in range(P.cols))] for i in range(P.rows)]


def tensor_from_json(field: Field, obj: Any, path: str = "$.tensor") -> Tensor:
    shape = _get(obj, "shape", path)
    entries = _get(obj, "entries", path)
    if not isinstance(shape, list) or not all(isinstance(n, int) and n >= 1 for n in shape):
        raise SchemaError(f"{path}.shape", "expected an array of positive integers")
    if len(shape) < 2:
        raise SchemaError(f"{path}.shape", "tensors need at least two modes")
    if not isinstance(entries, list):
        raise SchemaError(f"{path}.entries", "expected an array")
    vals = [_scalar(field, x, f"{path}.entries[{k}]") for k, x in enumerate(entries)]
    try:
        return Tensor(field, tuple(shape), tuple(vals))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def tensor_to_json(T: Tensor) -> Dict[str, Any]:
    return {"shape": list(T.shape), "entries": [T.field.to_json(x) for x in T.entries]}


def family_from_json(field: Field, obj: Mapping, path: str = "$") -> AffineMatrixFamily:
    base = matrix_from_json(field, _get(obj, "base", path), f"{path}.base")
    terms_obj = obj.get("terms", [])
    if not isinstance(terms_obj, list):
        raise SchemaError(f"{path}.terms", "expected an array")
    terms = []
    for k, t in enumerate(terms_obj):
        tp = f"{path}.terms[{k}]"
        var = _get(t, "var", tp)
        if not isinstance(var, str) or not var:
            raise SchemaError(f"{tp}.var", "expected a non-empty string")
        C = matrix_from_json(field, _get(t, "coeff", tp), f"{tp}.coeff")
        if C.shape != base.shape:
            raise SchemaError(f"{tp}.coeff", f"shape {C.shape} differs from base {base.shape}")
        terms.append((var, C))
    try:
        return AffineMatrixFamily(base, tuple(terms))
    except ValueError as exc:
        raise SchemaError(f"{path}.terms", str(exc)) from None


def family_to_json(fam: AffineMatrixFamily) -> Dict[str, Any]:
    return {"base": matrix_to_json(fam.base),
            "terms": [{"var": v, "coeff": matrix_to_json(c)} for v, c in fam.terms]}


def load_instance(obj: Any, field: Optional[Field] = None) -> Tuple[str, Instance]:
    """``(kind, instance)`` from a parsed JSON object.

    ``field`` overrides the tag in the file. A reduce report (an object with
    an ``"instance"`` key) is accepted and its instance is loaded.
    """
    if isinstance(obj, Mapping) and "instance" in obj and "kind" not in obj:
        return load_instance(obj["instance"], field)
    kind = _get(obj, "kind", "$")
    if kind not in KINDS:
        raise SchemaError("$.kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    f = field if field is not None else parse_field(_get(obj, "field", "$"))
    if kind == "rm":
        return kind, family_from_json(f, obj)
    if kind == "lrmc":
        return kind, partial_from_json(f, _get(obj, "matrix", "$"))
    if kind == "tr":
        return kind, tensor_from_json(f, _get(obj, "tensor", "$"))
    return kind, matrix_from_json(f, _get(obj, "matrix", "$"))


def dump_instance(inst: Instance) -> Dict[str, Any]:
    if isinstance(inst, AffineMatrixFamily):
        return {"kind": "rm", "field": inst.field.tag(), **family_to_json(inst)}
    if isinstance(inst, PartialMatrix):
        return {"kind": "lrmc", "field": inst.field.tag(), "matrix": partial_to_json(inst)}
    if isinstance(inst, Tensor):
        return {"kind": "tr", "field": inst.field.tag(), "tensor": tensor_to_json(inst)}
    if isinstance(inst, Matrix):
        return {"kind": "matrix", "field": inst.field.tag(), "matrix": matrix_to_json(inst)}
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def witness_to_json(field: Field, witness: Any) -> Any:
    """Assignments become objects; decompositions become arrays of factor lists."""
    if isinstance(witness, Mapping):
        return {k: field.to_json(field(v)) for k, v in sorted(witness.items())}
    out = []
    for t in witness:
        if isinstance(t, PureTensor):
            out.append([[field.to_json(x) for x in v] for v in t.factors])
        elif isinstance(t, Tensor):
            out.append(tensor_to_json(t))
        else:
            raise TypeError(f"cannot serialize witness part {t!r}")
    return out


def certificate_from_json(obj: Any, path: str = "$.certificate") -> Certificate:
    try:
        return Certificate.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(path, f"malformed certificate ({exc})") from None


def canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj: Any) -> str:
    """Short SHA-256 of the canonical JSON form."""
    return hashlib.sha256(canonical(obj).encode()).hexdigest()[:16]


__all__ = [
    "KINDS", "SchemaError", "canonical", "certificate_from_json", "digest", "dump_instance",
    "family_from_json", "family_to_json", "load_instance", "matrix_from_json", "matrix_to_json",
    "parse_field", "partial_from_json", "partial_to_json", "tensor_from_json", "tensor_to_json",
    "witness_to_json",
]
