"""Exact dyadic rationals (numerator / 2**exponent) and geometric tail sums."""

from __future__ import annotations

import sys
from functools import lru_cache
from math import comb
from numbers import Rational

MAX_POWER = 64


class BudgetError(ValueError):
    """A request exceeds a configured size budget."""


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


class Dyadic:
    """Immutable rational number whose denominator is a power of two.

    Always stored normalized: the numerator is odd, or the value is ``0/2^0``.
    Because of this, ``==`` and ``hash`` are structural.

    >>> Dyadic(3, 3) + Dyadic(1, 1)
    Dyadic(7, 3)
    >>> str(Dyadic(3, 2))
    '3/2^2'
    """

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        numerator = int(numerator)
        exponent = int(exponent)
        if numerator == 0:
            exponent = 0
        else:
            tz = _trailing_zeros(numerator)
            if exponent < 0:
                numerator <<= -exponent
                exponent = 0
            elif tz:
                k = min(tz, exponent)
                numerator >>= k
                exponent -= k
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def coerce(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, Rational):
            den = int(value.denominator)
            if den & (den - 1):
                raise ValueError(f"{value!r} is not dyadic")
            return cls(int(value.numerator), den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        try:
            other = Dyadic.coerce(other)
        except TypeError:
            return NotImplemented
        e = max(self.exponent, other.exponent)
        n = (self.numerator << (e - self.exponent)) + (other.numerator << (e - other.exponent))
        return Dyadic(n, e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.numerator, self.exponent)

    def __sub__(self, other):
        try:
            other = Dyadic.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Dyadic.coerce(other) - self

    def __mul__(self, other):
        try:
            other = Dyadic.coerce(other)
        except TypeError:
            return NotImplemented
        return Dyadic(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def halve(self) -> "Dyadic":
        return Dyadic(self.numerator, self.exponent + 1)

    def shift_scale(self, k: int) -> "Dyadic":
        """Return ``self * 2**k``; ``k`` may be negative."""
        return Dyadic(self.numerator, self.exponent - k)

    # -- comparisons / conversions ----------------------------------------

    def _cmp_key(self, other: "Dyadic") -> tuple[int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.numerator == other.numerator and self.exponent == other.exponent
        if isinstance(other, (int, Rational)):
            try:
                return self == Dyadic.coerce(other)
            except ValueError:
                return False
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        # same value as hash(Fraction(...)), so mixed dict keys behave
        M = sys.hash_info.modulus
        h = abs(self.numerator) % M * pow(2, -self.exponent, M) % M
        h = h if self.numerator >= 0 else -h
        return -2 if h == -1 else h

    def __lt__(self, other):
        a, b = self._cmp_key(Dyadic.coerce(other))
        return a < b

    def __le__(self, other):
        a, b = self._cmp_key(Dyadic.coerce(other))
        return a <= b

    def __gt__(self, other):
        a, b = self._cmp_key(Dyadic.coerce(other))
        return a > b

    def __ge__(self, other):
        a, b = self._cmp_key(Dyadic.coerce(other))
        return a >= b

    def __bool__(self):
        return self.numerator != 0

    def __float__(self):
        # int / int is correctly rounded for arbitrarily large operands
        return self.numerator / (1 << self.exponent)

    def __abs__(self):
        return Dyadic(abs(self.numerator), self.exponent)

    def __repr__(self):
        return f"Dyadic({self.numerator}, {self.exponent})"

    def __str__(self):
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.exponent}"

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        num, _, exp = text.strip().partition("/2^")
        return cls(int(num), int(exp or 0))


def dyadic_arith(x, y, op: str) -> Dyadic:
    """Dispatch form of the arithmetic: op in add, sub, mul, halve, shift_scale.

    For ``halve`` the second argument is ignored; for ``shift_scale`` it is the
    integer power ``k``.
    """
    x = Dyadic.coerce(x)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "halve":
        return x.halve()
    if op == "shift_scale":
        return x.shift_scale(int(y))
    raise ValueError(f"unknown op {op!r}")


@lru_cache(maxsize=None)
def ordered_sum_constant(m: int) -> int:
    """Integer value of sum_{j>=1} j**m / 2**j.

    Satisfies c_0 = 1 and c_m = 2 + sum_{i=1}^{m-1} C(m, i) c_i for m >= 1
    (1, 2, 6, 26, 150, ...).
    """
    if m == 0:
        return 1
    return 2 + sum(comb(m, i) * ordered_sum_constant(i) for i in range(1, m))


def tail_power_sum(k: int, D: int) -> Dyadic:
    """Exact value of ``sum_{d < D} d**k * 2**d``."""
    if k < 0 or k > MAX_POWER:
        raise ValueError(f"power k={k} outside [0, {MAX_POWER}]")
    # d = D - j, j >= 1:  2^D * sum_m C(k,m) D^(k-m) (-1)^m c_m
    total = sum(
        comb(k, m) * D ** (k - m) * (-1) ** m * ordered_sum_constant(m) for m in range(k + 1)
    )
    return Dyadic(total, 0).shift_scale(D)
