"""Problem instances: affine matrix families (RM / 1-RM), partially filled
matrices (LRMC) and tensor-rank instances, plus reduction certificates."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple, Union

from .algebra import Matrix, Tensor, rank
from .fields import Field, Scalar

Assignment = Dict[str, Scalar]


@dataclass(frozen=True)
class AffineMatrixFamily:
    """``base + sum_i x_i * coeff_i`` with named variables."""

    base: Matrix
    terms: Tuple[Tuple[str, Matrix], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((str(v), c) for v, c in self.terms))
        names = [v for v, _ in self.terms]
        if len(set(names)) != len(names):
            raise ValueError("variable ids must be distinct")
        for v, c in self.terms:
            if c.shape != self.base.shape:
                raise ValueError(f"coefficient of {v} has shape {c.shape}, expected {self.base.shape}")
            if c.field != self.base.field:
                raise ValueError(f"coefficient of {v} lives over {c.field!r}")

    @property
    def field(self) -> Field:
        return self.base.field

    @property
    def shape(self) -> Tuple[int, int]:
        return self.base.shape

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def coeff(self, var: str) -> Matrix:
        for v, c in self.terms:
            if v == var:
                return c
        raise KeyError(var)

    def evaluate(self, a: Mapping[str, Any]) -> Matrix:
        return evaluate(self, a)

    def transpose(self) -> "AffineMatrixFamily":
        return AffineMatrixFamily(self.base.T, tuple((v, c.T) for v, c in self.terms))

    def padded(self, n: int, m: int) -> "AffineMatrixFamily":
        return AffineMatrixFamily(self.base.padded(n, m),
                                  tuple((v, c.padded(n, m)) for v, c in self.terms))


def evaluate(fam: AffineMatrixFamily, a: Mapping[str, Any]) -> Matrix:
    """``base + sum a[var] * coeff`` computed exactly."""
    f = fam.field
    out = list(fam.base.entries)
    for v, c in fam.terms:
        if v not in a:
            raise KeyError(f"assignment is missing variable {v!r}")
        x = f(a[v])
        if x == 0:
            continue
        for k, y in enumerate(c.entries):
            if y != 0:
                out[k] = f.add(out[k], f.mul(x, y))
    return Matrix(f, fam.base.rows, fam.base.cols, tuple(out))


@dataclass(frozen=True)
class Unknown:
    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


Cell = Union[Scalar, Unknown]


@dataclass(frozen=True)
class PartialMatrix:
    field: Field
    rows: int
    cols: int
    cells: Tuple[Cell, ...]

    def __post_init__(self):
        if len(self.cells) != self.rows * self.cols:
            raise ValueError("cell count does not match the shape")
        names = [c.name for c in self.cells if isinstance(c, Unknown)]
        if len(set(names)) != len(names):
            raise ValueError("each unknown must occupy exactly one cell")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence]) -> "PartialMatrix":
        n = len(rows)
        m = len(rows[0]) if n else 0
        cells = []
        for r in rows:
            if len(r) != m:
                raise ValueError("ragged rows")
            cells.extend(x if isinstance(x, Unknown) else field(x) for x in r)
        return cls(field, n, m, tuple(cells))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: Tuple[int, int]) -> Cell:
        i, j = ij
        return self.cells[i * self.cols + j]

    def unknowns(self) -> List[str]:
        return [c.name for c in self.cells if isinstance(c, Unknown)]

    def unknown_positions(self) -> Dict[str, Tuple[int, int]]:
        return {c.name: divmod(k, self.cols)
                for k, c in enumerate(self.cells) if isinstance(c, Unknown)}

    def complete(self, a: Mapping[str, Any]) -> Matrix:
        f = self.field
        return Matrix(f, self.rows, self.cols, tuple(
            f(a[c.name]) if isinstance(c, Unknown) else c for c in self.cells))

    def known_rank_bound(self) -> int:
        """Lower bound on the completion rank from fully known rows/columns."""
        full_rows = [i for i in range(self.rows)
                     if not any(isinstance(self[i, j], Unknown) for j in range(self.cols))]
        full_cols = [j for j in range(self.cols)
                     if not any(isinstance(self[i, j], Unknown) for i in range(self.rows))]
        a = rank(Matrix(self.field, len(full_rows), self.cols,
                        tuple(self[i, j] for i in full_rows for j in range(self.cols))))
        b = rank(Matrix(self.field, self.rows, len(full_cols),
                        tuple(self[i, j] for i in range(self.rows) for j in full_cols)))
        return max(a, b)

    def __str__(self) -> str:
        def fmt(c):
            return "?" if isinstance(c, Unknown) else str(c)
        return "\n".join(" ".join(fmt(self[i, j]) for j in range(self.cols))
                         for i in range(self.rows))


def block_diag_partial(field: Field, *blocks: PartialMatrix) -> PartialMatrix:
    n = sum(b.rows for b in blocks)
    m = sum(b.cols for b in blocks)
    cells: List[Cell] = [field.zero] * (n * m)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                cells[(r0 + i) * m + c0 + j] = b[i, j]
        r0 += b.rows
        c0 += b.cols
    return PartialMatrix(field, n, m, tuple(cells))


@dataclass(frozen=True)
class TRInstance:
    tensor: Tensor

    def __post_init__(self):
        if self.tensor.order < 2:
            raise ValueError("tensor rank instances need order >= 2")


def lrmc_as_1rm(P: PartialMatrix) -> AffineMatrixFamily:
    """Completion problem as a family with one single-entry term per unknown."""
    f = P.field
    base = Matrix(f, P.rows, P.cols, tuple(
        f.zero if isinstance(c, Unknown) else c for c in P.cells))
    terms = tuple((name, Matrix.unit(f, P.rows, P.cols, i, j))
                  for name, (i, j) in P.unknown_positions().items())
    return AffineMatrixFamily(base, terms)


def validate_1rm(fam: AffineMatrixFamily) -> bool:
    return all(rank(c) == 1 for _, c in fam.terms)


# certificates

PullbackFn = Callable[[Mapping[str, Any], Any], Any]
_PULLBACKS: Dict[str, PullbackFn] = {}


def register_pullback(kind: str):
    """Register the executable pullback for certificates of ``kind``."""
    def deco(fn: PullbackFn) -> PullbackFn:
        _PULLBACKS[kind] = fn
        return fn
    return deco


@dataclass(frozen=True)
class Certificate:
    """Offset and pullback data of one reduction.

    ``data`` is plain JSON; the executable pullback is looked up by ``kind``
    so a certificate read back from disk behaves like the original.
    """

    kind: str
    offset: int
    data: Dict[str, Any] = dc_field(default_factory=dict)

    def pull(self, witness: Any) -> Any:
        try:
            fn = _PULLBACKS[self.kind]
        except KeyError:
            raise ValueError(f"no pullback registered for {self.kind!r}") from None
        return fn(self.data, witness)

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "offset": self.offset, "data": self.data}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "Certificate":
        return cls(str(obj["kind"]), int(obj["offset"]), dict(obj.get("data", {})))


def compose(*certs: Certificate) -> Certificate:
    """Certificate of the composite reduction (first applied first)."""
    return Certificate("chain", sum(c.offset for c in certs),
                       {"steps": [c.to_json() for c in certs]})


@register_pullback("identity")
def _pull_identity(data, witness):
    return witness


@register_pullback("chain")
def _pull_chain(data, witness):
    for step in reversed(data["steps"]):
        witness = Certificate.from_json(step).pull(witness)
    return witness
