from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from digitcorr.dyadic import Dyadic, dyadic_arith, ordered_sum_constant, tail_power_sum

dyadics = st.builds(Dyadic, st.integers(-(10**30), 10**30), st.integers(0, 80))


def frac(x: Dyadic) -> Fraction:
    return Fraction(x.numerator, 1 << x.exponent)


def test_normalized_storage():
    assert Dyadic(6, 3) == Dyadic(3, 2)
    assert (Dyadic(6, 3).numerator, Dyadic(6, 3).exponent) == (3, 2)
    assert (Dyadic(0, 9).numerator, Dyadic(0, 9).exponent) == (0, 0)
    assert Dyadic(3, -2) == 12


def test_examples():
    assert Dyadic(3, 3) + Dyadic(1, 1) == Dyadic(7, 3)
    assert Dyadic(1, 2).halve() == Dyadic(1, 3)
    assert Dyadic(5, 4).shift_scale(3) == Dyadic(5, 1)
    assert str(Dyadic(3, 2)) == "3/2^2"
    assert Dyadic.parse("5/2^4") == Dyadic(5, 4)
    assert Dyadic.parse("-7") == -7


def test_coerce_rejects_non_dyadic():
    assert Dyadic.coerce(Fraction(3, 8)) == Dyadic(3, 3)
    with pytest.raises(ValueError):
        Dyadic.coerce(Fraction(1, 3))
    with pytest.raises(TypeError):
        Dyadic.coerce(0.5)


def test_dispatch():
    x, y = Dyadic(3, 2), Dyadic(1, 3)
    assert dyadic_arith(x, y, "add") == Dyadic(7, 3)
    assert dyadic_arith(x, y, "sub") == Dyadic(5, 3)
    assert dyadic_arith(x, y, "mul") == Dyadic(3, 5)
    assert dyadic_arith(x, None, "halve") == Dyadic(3, 3)
    assert dyadic_arith(x, -1, "shift_scale") == Dyadic(3, 3)
    with pytest.raises(ValueError):
        dyadic_arith(x, y, "div")


@given(dyadics, dyadics)
def test_field_operations_match_fraction(x, y):
    assert frac(x + y) == frac(x) + frac(y)
    assert frac(x - y) == frac(x) - frac(y)
    assert frac(x * y) == frac(x) * frac(y)
    assert (x < y) == (frac(x) < frac(y))
    assert (x == y) == (frac(x) == frac(y))


@given(dyadics, st.integers(-40, 40))
def test_scaling_and_roundtrip(x, k):
    assert frac(x.shift_scale(k)) == frac(x) * Fraction(2) ** k
    assert frac(x.halve()) == frac(x) / 2
    assert Dyadic.parse(str(x)) == x
    assert hash(x) == hash(frac(x))
    assert x == frac(x)


def test_float_conversion_is_correctly_rounded():
    big = Dyadic(2**200 + 1, 199)
    assert float(big) == 2.0
    assert float(Dyadic(1, 1100)) == 0.0
    assert float(Dyadic(-3, 2)) == -0.75


def test_ordered_sum_constants():
    assert [ordered_sum_constant(m) for m in range(6)] == [1, 2, 6, 26, 150, 1082]
    for m in range(6):
        brute = sum(Fraction(j**m, 2**j) for j in range(1, 400))
        assert abs(brute - ordered_sum_constant(m)) < Fraction(1, 2**300)


@pytest.mark.parametrize("k", range(0, 7))
@pytest.mark.parametrize("D", [-5, -1, 0, 1, 2, 7])
def test_tail_power_sum_matches_truncated_series(k, D):
    brute = sum(Fraction(d**k) * Fraction(2) ** d for d in range(D - 600, D))
    assert abs(frac(tail_power_sum(k, D)) - brute) < Fraction(1, 2**400)


def test_tail_power_sum_frozen_values():
    assert tail_power_sum(0, 0) == 1
    assert tail_power_sum(1, 0) == -2
    assert tail_power_sum(2, 0) == 6
    # sum_{d<2} d^2 2^d = 2 (d=1) + 6 (d<=0)
    assert tail_power_sum(2, 2) == 8
    assert tail_power_sum(0, 3) == 8
    with pytest.raises(ValueError):
        tail_power_sum(65, 0)
