from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rankred.fields import GF, QQ, field_from_tag, is_prime

from helpers import fields, scalars


def test_is_prime_small_values():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("p", [0, 1, 4, 9, 65537, 65536])
def test_gf_rejects_non_primes_and_large_primes(p):
    with pytest.raises(ValueError):
        GF(p)


def test_gf_rejects_non_int():
    with pytest.raises(TypeError):
        GF(2.0)


def test_gf_is_cached_and_hashable():
    assert GF(7) is GF(7)
    assert {GF(7), GF(7), QQ} == {GF(7), QQ}
    assert GF(5) != GF(7)


def test_rational_images_in_prime_fields():
    # -1/3 in GF(7): 3 * 2 = 6 = -1
    assert GF(7)("-1/3") == 2
    assert GF(11)("-1/3") == 7
    assert GF(13)(Fraction(-1, 7)) == 11
    with pytest.raises(ZeroDivisionError):
        GF(3)("1/3")


def test_rational_field_parsing():
    assert QQ("-2/6") == Fraction(-1, 3)
    assert QQ(4) == Fraction(4)
    assert QQ.to_json(Fraction(-1, 3)) == "-1/3"
    assert QQ.to_json(Fraction(6, 3)) == 2


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        GF(5).inv(0)
    with pytest.raises(ZeroDivisionError):
        QQ.inv(Fraction(0))


def test_square_classes():
    # -1 is a square exactly when p = 2 or p = 1 mod 4
    assert GF(5).is_square(4) and not GF(3).is_square(2)
    assert [p for p in (2, 3, 5, 7, 11, 13) if GF(p).is_square(GF(p).neg(1))] == [2, 5, 13]


@pytest.mark.parametrize("f", [GF(2), GF(65521), QQ])
def test_tag_roundtrip(f):
    assert field_from_tag(f.tag()) == f


def test_unknown_tag():
    with pytest.raises(ValueError):
        field_from_tag({"q": 3})


@given(st.data())
def test_field_axioms(data):
    f = data.draw(fields())
    a, b, c = (f(data.draw(scalars(f))) for _ in range(3))
    assert f.add(a, f.add(b, c)) == f.add(f.add(a, b), c)
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.add(a, f.neg(a)) == f.zero
    assert f.sub(a, b) == f.add(a, f.neg(b))
    if a != 0:
        assert f.mul(a, f.inv(a)) == f.one
        assert f.div(b, a) == f.mul(b, f.inv(a))


@given(st.sampled_from([2, 3, 5, 7, 251, 65521]), st.integers(-10**6, 10**6))
def test_prime_field_reduces_integers(p, x):
    assert GF(p)(x) == x % p
