"""Exact correlation measures mu_a built from the pair recursion.

Every mu_a is a probability measure on the integers whose left tail is
eventually geometric, mu(d) = t * 2**d for all d below some threshold D.
:class:`HybridMeasure` stores the finite window [D, d_max] exactly together
with that tail, so shifts and averages (the only operations the recursion
needs) never truncate anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .dyadic import MAX_POWER, Dyadic, tail_power_sum

__all__ = [
    "DigitString",
    "HybridMeasure",
    "MeasurePair",
    "seed_pair",
    "pair_step",
    "measure_of",
    "measure_table",
    "moment",
    "variance_closed_form",
    "cusick_c",
    "float_measure_of",
]


@dataclass(frozen=True)
class DigitString:
    """Binary digits of ``a``, least significant first.

    Leading (most significant) zeros are allowed and kept; they do not change
    :attr:`value` but they do change :attr:`n`.
    """

    digits: tuple[int, ...]

    def __post_init__(self):
        digits = tuple(int(x) for x in self.digits)
        if any(x not in (0, 1) for x in digits):
            raise ValueError("digits must be 0 or 1")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def from_int(cls, a: int, length: int | None = None) -> "DigitString":
        if a < 0:
            raise ValueError("a must be non-negative")
        digits = [int(c) for c in reversed(bin(a)[2:])]
        if length is not None:
            if length < len(digits) and a != 0:
                raise ValueError(f"{a} needs more than {length} digits")
            digits = (digits + [0] * length)[:length] if a else [0] * max(length, 1)
        return cls(tuple(digits))

    @classmethod
    def coerce(cls, a) -> "DigitString":
        if isinstance(a, DigitString):
            return a
        if isinstance(a, (int, np.integer)):
            return cls.from_int(int(a))
        return cls(tuple(a))

    @property
    def n(self) -> int:
        return len(self.digits)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(2 * x - 1 for x in self.digits)

    @property
    def value(self) -> int:
        return sum(x << k for k, x in enumerate(self.digits))

    def padded(self, zeros: int) -> "DigitString":
        return DigitString(self.digits + (0,) * zeros)

    def reversed(self) -> "DigitString":
        """Mirror image of the binary representation (leading zeros dropped first)."""
        a = self.value
        if a == 0:
            return DigitString((0,))
        return DigitString.from_int(int(bin(a)[2:][::-1], 2))


class HybridMeasure:
    """Exact measure: finite window plus a geometric left tail.

    Internally everything is an integer numerator over the common denominator
    ``2**scale``: ``vals[i]`` is the mass at ``D + i`` and ``tail_top`` the
    mass at ``D - 1``, with mass ``tail_top * 2**(d - D + 1)`` at every
    ``d < D``. Construction canonicalizes, so equal measures compare equal
    structurally.
    """

    __slots__ = ("D", "vals", "tail_top", "scale")

    def __init__(self, D: int, vals: Sequence[int], tail_top: int, scale: int):
        vals = list(vals)
        while vals and vals[-1] == 0:
            vals.pop()
        # pull the start of the window into the tail while it continues the geometric law
        i = 0
        while i < len(vals) and vals[i] == 2 * tail_top:
            tail_top = vals[i]
            i += 1
        if i:
            vals = vals[i:]
            D += i
        if tail_top == 0 and not vals:
            D = 0
        if scale > 0:
            acc = tail_top
            for v in vals:
                acc |= v
            if acc == 0:
                scale = 0
            else:
                k = min((acc & -acc).bit_length() - 1, scale)
                if k:
                    tail_top >>= k
                    vals = [v >> k for v in vals]
                    scale -= k
        self.D = D
        self.vals = vals
        self.tail_top = tail_top
        self.scale = scale

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_parts(cls, finite: dict[int, Dyadic], D: int, t: Dyadic) -> "HybridMeasure":
        """Build from the public description: finite part, threshold, tail coefficient."""
        t = Dyadic.coerce(t)
        items = {d: Dyadic.coerce(v) for d, v in finite.items() if v}
        if any(d < D for d in items):
            raise ValueError("finite part has entries below the tail threshold")
        top = t.shift_scale(D - 1)
        scale = max([top.exponent] + [v.exponent for v in items.values()])
        hi = max(items, default=D - 1)
        vals = [0] * (hi - D + 1)
        for d, v in items.items():
            vals[d - D] = v.numerator << (scale - v.exponent)
        return cls(D, vals, top.numerator << (scale - top.exponent), scale)

    @classmethod
    def dirac(cls, d: int = 0) -> "HybridMeasure":
        return cls(d, [1], 0, 0)

    # -- public view -------------------------------------------------------

    @property
    def tail_threshold(self) -> int:
        return self.D

    @property
    def tail_coeff(self) -> Dyadic:
        return Dyadic(self.tail_top, self.scale).shift_scale(1 - self.D)

    @property
    def finite_part(self) -> dict[int, Dyadic]:
        return {self.D + i: Dyadic(v, self.scale) for i, v in enumerate(self.vals) if v}

    @property
    def d_max(self) -> int:
        """Largest support point."""
        if self.vals:
            return self.D + len(self.vals) - 1
        return self.D - 1

    def __call__(self, d: int) -> Dyadic:
        i = d - self.D
        if i >= 0:
            return Dyadic(self.vals[i], self.scale) if i < len(self.vals) else Dyadic(0)
        return Dyadic(self.tail_top, self.scale).shift_scale(i + 1)

    def mass(self) -> Dyadic:
        return Dyadic(sum(self.vals) + 2 * self.tail_top, self.scale)

    def __eq__(self, other):
        if not isinstance(other, HybridMeasure):
            return NotImplemented
        return (
            self.D == other.D
            and self.scale == other.scale
            and self.tail_top == other.tail_top
            and self.vals == other.vals
        )

    def __hash__(self):
        return hash((self.D, self.scale, self.tail_top, tuple(self.vals)))

    def __repr__(self):
        return (
            f"HybridMeasure(D={self.D}, finite={{{', '.join(f'{d}: {v}' for d, v in self.finite_part.items())}}}, "
            f"t={self.tail_coeff})"
        )

    # -- operations used by the recursion ------------------------------------

    def shift(self, k: int) -> "HybridMeasure":
        """Measure of ``d -> mu(d - k)``."""
        m = object.__new__(HybridMeasure)
        m.D, m.vals, m.tail_top, m.scale = self.D + k, self.vals, self.tail_top, self.scale
        return m

    def _extended(self, D: int, scale: int) -> tuple[list[int], int]:
        """Numerators over 2**scale with the window pushed down to threshold D <= self.D."""
        gap = self.D - D
        up = scale - self.scale
        top = self.tail_top << up
        ext = [top >> (gap - 1 - j) for j in range(gap)]
        return ext + [v << up for v in self.vals], top >> gap

    @staticmethod
    def average(mu: "HybridMeasure", nu: "HybridMeasure") -> "HybridMeasure":
        """(mu + nu) / 2, exactly."""
        D = min(mu.D, nu.D)
        # materializing the tail between thresholds divides tail_top by up to 2**gap
        scale = max(mu.scale + (mu.D - D), nu.scale + (nu.D - D)) + 1
        a, ta = mu._extended(D, scale - 1)
        b, tb = nu._extended(D, scale - 1)
        if len(a) < len(b):
            a, b = b, a
        vals = a[:]
        for i, v in enumerate(b):
            vals[i] += v
        return HybridMeasure(D, vals, ta + tb, scale)

    def moment(self, k: int) -> Dyadic:
        return moment(self, k)

    def to_float(self, below: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Support points and float masses, with the tail listed ``below`` points deep."""
        ds = np.arange(self.D - below, self.d_max + 1)
        tail = [float(Dyadic(self.tail_top, self.scale).shift_scale(j - below + 1)) for j in range(below)]
        fin = [float(Dyadic(v, self.scale)) for v in self.vals]
        return ds, np.array(tail + fin, dtype=float)

    def cdf_points(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Exact cumulative masses at each window point, rounded once to float.

        Returns ``(d, F(d), tail_top_float)``; below the window
        ``F(d) = 2 * tail_top * 2**(d - D + 1)`` in units of the common scale.
        """
        acc = 2 * self.tail_top
        out = []
        for v in self.vals:
            acc += v
            out.append(acc / (1 << self.scale))
        ds = np.arange(self.D, self.D + len(self.vals))
        return ds, np.array(out, dtype=float), self.tail_top / (1 << self.scale)

    def dump_lines(self) -> list[str]:
        """Text dump: ``d<TAB>dyadic<TAB>float`` by descending d, then ``TAIL D t``."""
        lines = []
        for d in range(self.d_max, self.D - 1, -1):
            v = self(d)
            if v:
                lines.append(f"{d}\t{v}\t{float(v):.17g}")
        lines.append(f"TAIL {self.D} {self.tail_coeff}")
        return lines


@dataclass(frozen=True)
class MeasurePair:
    first: HybridMeasure
    second: HybridMeasure


def seed_pair() -> MeasurePair:
    """(mu_0, mu_1): the Dirac mass at 0 and the law 2**(d-2) on d <= 1."""
    mu0 = HybridMeasure.dirac(0)
    # pure tail: mass 1/2 at D - 1 = 1, halving for each step down
    mu1 = HybridMeasure(2, [], 1, 1)
    return MeasurePair(mu0, mu1)


def _odd_child(pair: MeasurePair) -> HybridMeasure:
    return HybridMeasure.average(pair.first.shift(1), pair.second.shift(-1))


def pair_step(pair: MeasurePair, digit: int) -> MeasurePair:
    """(mu_a, mu_{a+1}) -> (mu_{2a}, mu_{2a+1}) for digit 0, (mu_{2a+1}, mu_{2a+2}) for 1."""
    odd = _odd_child(pair)
    if digit == 0:
        return MeasurePair(pair.first, odd)
    if digit == 1:
        return MeasurePair(odd, pair.second)
    raise ValueError(f"digit must be 0 or 1, got {digit!r}")


def measure_pair_of(a) -> MeasurePair:
    pair = seed_pair()
    for digit in reversed(DigitString.coerce(a).digits):
        pair = pair_step(pair, digit)
    return pair


def measure_of(a) -> HybridMeasure:
    """Exact mu_a, folding the pair recursion over the digits from the most significant."""
    return measure_pair_of(a).first


def measure_table(limit: int) -> list[HybridMeasure]:
    """[mu_0, ..., mu_{limit-1}] via mu_2a = mu_a and the odd rule."""
    table = [HybridMeasure.dirac(0), seed_pair().second]
    for a in range(2, limit):
        h = a >> 1
        if a & 1:
            table.append(HybridMeasure.average(table[h].shift(1), table[h + 1].shift(-1)))
        else:
            table.append(table[h])
    return table[:limit]


def iter_measures(bits: int) -> Iterator[tuple[int, HybridMeasure]]:
    """Yield ``(a, mu_a)`` for all ``a < 2**bits`` by walking the pair tree (a order is not sorted)."""
    yield 0, HybridMeasure.dirac(0)
    stack = [(1, 1, MeasurePair(*_pair_after_one()))]
    while stack:
        a, depth, pair = stack.pop()
        yield a, pair.first
        if depth < bits:
            stack.append((2 * a, depth + 1, pair_step(pair, 0)))
            stack.append((2 * a + 1, depth + 1, pair_step(pair, 1)))


def _pair_after_one() -> tuple[HybridMeasure, HybridMeasure]:
    p = pair_step(seed_pair(), 1)
    return p.first, p.second


def moment(mu: HybridMeasure, k: int) -> Dyadic:
    """Exact ``sum_d d**k mu(d)``."""
    if k < 0 or k > MAX_POWER:
        raise ValueError(f"moment order k={k} outside [0, {MAX_POWER}]")
    fin = sum((mu.D + i) ** k * v for i, v in enumerate(mu.vals))
    total = Dyadic(fin, mu.scale)
    if mu.tail_top:
        total = total + mu.tail_coeff * tail_power_sum(k, mu.D)
    return total


def variance_closed_form(a) -> Dyadic:
    """Variance of mu_a from the four-term formula in the sign sequence.

    ``n`` is the length of the digit string as given, leading zeros included.
    Works in O(n log n) (FFT autocorrelation) so long prefixes are cheap.
    """
    ds = DigitString.coerce(a)
    n = ds.n
    if n == 0:
        raise ValueError("digit string must be nonempty")
    b = np.asarray(ds.signs, dtype=np.int64)
    corr = _autocorrelation(b)  # corr[i] = sum_k b_k b_{k+i}
    # N1 / 2^(n-1) = sum_{i=1}^{n-1} corr[i] / 2^i
    N1 = 0
    for c in corr[1:].tolist():
        N1 = (N1 << 1) + c
    # N2 / 2^n = sum_k (b_k + b_{n-1-k}) / 2^(k+1)
    sym = (b + b[::-1]).tolist()
    N2 = 0
    for s in reversed(sym):
        N2 = (N2 << 1) + s
    # n/2 + 1 - 2^-n - N1/2^n + N2/2^n, over the common denominator 2^n
    num = (n << (n - 1)) + (1 << n) - 1 - N1 + N2
    return Dyadic(num, n)


def _autocorrelation(b: np.ndarray) -> np.ndarray:
    n = len(b)
    if n < 4096:
        return np.correlate(b, b, mode="full")[n - 1 :]
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(b.astype(float), size)
    raw = np.fft.irfft(f * np.conj(f), size)[:n]
    out = np.rint(raw)
    if np.max(np.abs(raw - out)) > 0.25:
        raise ArithmeticError("FFT autocorrelation lost integer precision")
    return out.astype(np.int64)


def cusick_c(a) -> Dyadic:
    """c_a = sum_{d >= 0} mu_a(d)."""
    mu = a if isinstance(a, HybridMeasure) else measure_of(a)
    start = max(0, -mu.D)
    total = Dyadic(sum(mu.vals[start:]), mu.scale)
    if mu.D > 0 and mu.tail_top:
        # sum_{d=0}^{D-1} t 2^d = t (2^D - 1)
        total = total + mu.tail_coeff * ((1 << mu.D) - 1)
    return total


def float_measure_of(a) -> tuple[int, np.ndarray, float]:
    """Float64 version of :func:`measure_of` for long digit strings.

    Returns ``(D, window, tail_top)`` with the same meaning as the exact
    representation (masses rather than numerators). No absorption is done;
    the window simply grows.
    """
    ds = DigitString.coerce(a)

    def avg(m1, m2):
        (D1, v1, t1), (D2, v2, t2) = m1, m2
        D = min(D1, D2)

        def ext(Dm, v, t):
            gap = Dm - D
            head = t * np.exp2(-np.arange(gap - 1, -1, -1, dtype=float)) if gap else np.empty(0)
            return np.concatenate([head, v]), t * 2.0**-gap

        a1, s1 = ext(D1, v1, t1)
        a2, s2 = ext(D2, v2, t2)
        size = max(len(a1), len(a2))
        out = np.zeros(size)
        out[: len(a1)] += a1
        out[: len(a2)] += a2
        return D, 0.5 * out, 0.5 * (s1 + s2)

    first = (0, np.array([1.0]), 0.0)
    second = (2, np.empty(0), 0.5)
    for digit in reversed(ds.digits):
        odd = avg((first[0] + 1, first[1], first[2]), (second[0] - 1, second[1], second[2]))
        if digit == 0:
            second = odd
        else:
            first = odd
    return first
