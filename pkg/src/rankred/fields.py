"""Exact scalar fields: prime fields GF(p) and the rationals.

Elements are plain Python values so that matrices stay cheap to build and
hash: GF(p) elements are ints in ``range(p)`` and rational elements are
``fractions.Fraction`` (always in lowest terms, positive denominator).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterator, Union

Scalar = Union[int, Fraction]

MAX_PRIME = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _parse_rational(x: Any) -> Fraction:
    if isinstance(x, bool):
        raise TypeError(f"not a field scalar: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise ValueError(f"cannot parse scalar {x!r}") from exc
    raise TypeError(f"not a field scalar: {x!r}")


class Field:
    """Common interface of the two supported fields."""

    is_finite: bool = False

    zero: Scalar
    one: Scalar

    def __call__(self, x: Any) -> Scalar:
        raise NotImplementedError

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def neg(self, a: Scalar) -> Scalar:
        raise NotImplementedError

    def inv(self, a: Scalar) -> Scalar:
        raise NotImplementedError

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        return self.mul(a, self.inv(b))

    def is_zero(self, a: Scalar) -> bool:
        return a == 0

    def to_json(self, a: Scalar) -> Union[int, str]:
        raise NotImplementedError

    def tag(self) -> Any:
        raise NotImplementedError


class PrimeField(Field):
    """GF(p) for a prime ``p < 2**16``."""

    is_finite = True

    def __init__(self, p: int):
        if not isinstance(p, int) or isinstance(p, bool):
            raise TypeError("p must be an int")
        if p >= MAX_PRIME or not is_prime(p):
            raise ValueError(f"GF(p) needs a prime p < {MAX_PRIME}, got {p}")
        self.p = p
        self.zero = 0
        self.one = 1

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))

    def __call__(self, x: Any) -> int:
        if isinstance(x, int) and not isinstance(x, bool):
            return x % self.p
        q = _parse_rational(x)
        if q.denominator % self.p == 0:
            raise ZeroDivisionError(f"{x!r} has no image in GF({self.p})")
        return q.numerator * pow(q.denominator, -1, self.p) % self.p

    @property
    def order(self) -> int:
        return self.p

    def elements(self) -> Iterator[int]:
        return iter(range(self.p))

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def is_square(self, a: int) -> bool:
        a %= self.p
        if a == 0 or self.p == 2:
            return True
        return pow(a, (self.p - 1) // 2, self.p) == 1

    def to_json(self, a: int) -> int:
        return int(a)

    def tag(self) -> dict:
        return {"p": self.p}


class RationalField(Field):
    """The field of rational numbers with exact big-integer arithmetic."""

    def __init__(self) -> None:
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __repr__(self) -> str:
        return "QQ"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("QQ")

    def __call__(self, x: Any) -> Fraction:
        return _parse_rational(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def to_json(self, a: Fraction) -> Union[int, str]:
        a = Fraction(a)
        if a.denominator == 1:
            return int(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def tag(self) -> str:
        return "Q"


QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_tag(tag: Any) -> Field:
    """Inverse of ``Field.tag``: ``{"p": 5}`` or ``"Q"``."""
    if tag in ("Q", "QQ"):
        return QQ
    if isinstance(tag, dict) and set(tag) == {"p"}:
        return GF(tag["p"])
    if isinstance(tag, int) and not isinstance(tag, bool):
        return GF(tag)
    raise ValueError(f"unknown field tag {tag!r}")
