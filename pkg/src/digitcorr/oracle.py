"""Brute-force densities of {n : s_2(n + a) - s_2(n) = d} over [0, N).

Nothing here touches the recursion machinery; it only counts bits.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dyadic import BudgetError

MAX_N = 1 << 34
CHUNK = 1 << 20
VERIFY_EVERY = 1 << 10
_OFFSET = 80  # bincount offset; |d| <= 64 + bits(a) in practice


class OracleMismatch(AssertionError):
    """The popcount difference disagreed with the carry count."""


def popcount(n: int) -> int:
    return n.bit_count()


def carries(n: int, a: int) -> int:
    """Number of carries in the binary addition n + a, by ripple simulation."""
    count = 0
    carry = 0
    while n or a or carry:
        s = (n & 1) + (a & 1) + carry
        carry = s >> 1
        count += carry
        n >>= 1
        a >>= 1
    return count


def digit_delta(n: int, a: int) -> int:
    """s_2(n + a) - s_2(n), cross-checked against s_2(a) - carries(n, a)."""
    if n < 0 or a < 0:
        raise ValueError("n and a must be non-negative")
    d = popcount(n + a) - popcount(n)
    if d != popcount(a) - carries(n, a):
        raise OracleMismatch(f"popcount/carry mismatch at n={n}, a={a}")
    return d


def _carries_vec(n: np.ndarray, a: int) -> np.ndarray:
    count = np.zeros(n.shape, dtype=np.int64)
    carry = np.zeros(n.shape, dtype=np.uint64)
    bits = max(int(n.max(initial=0)).bit_length(), a.bit_length()) + 1
    for j in range(bits):
        s = ((n >> np.uint64(j)) & np.uint64(1)) + np.uint64((a >> j) & 1) + carry
        carry = s >> np.uint64(1)
        count += carry.astype(np.int64)
    return count


@dataclass(frozen=True)
class DensityEstimate:
    a: int
    d: int
    N: int
    count: int

    @property
    def density(self) -> float:
        return self.count / self.N


@dataclass
class DensityScan:
    a: int
    N: int
    window: tuple[int, int]
    estimates: list[DensityEstimate]
    out_of_window: int
    checked: int
    mismatches: int

    def counts(self) -> dict[int, int]:
        return {e.d: e.count for e in self.estimates}


def _scan_chunk(a: int, lo: int, hi: int, verify_every: int):
    n = np.arange(lo, hi, dtype=np.uint64)
    d = np.bitwise_count(n + np.uint64(a)).astype(np.int64) - np.bitwise_count(n).astype(np.int64)
    hist = np.bincount(d + _OFFSET, minlength=2 * _OFFSET + 1)
    checked = mismatches = 0
    if verify_every:
        first = -lo % verify_every
        sample = n[first::verify_every]
        if len(sample):
            kummer = a.bit_count() - _carries_vec(sample, a)
            mismatches = int(np.count_nonzero(kummer != d[first::verify_every]))
            checked = len(sample)
    return hist, checked, mismatches


def density_scan(
    a: int,
    N: int,
    d_window: tuple[int, int] = (-40, 40),
    jobs: int = 1,
    verify_every: int = VERIFY_EVERY,
) -> DensityScan:
    """Histogram of s_2(n + a) - s_2(n) over n in [0, N), clipped to ``d_window``.

    Work is split into fixed chunks and merged by addition, so the result does
    not depend on ``jobs``. Every ``verify_every``-th n (0 disables) is also
    checked against the carry count.
    """
    if N <= 0:
        raise ValueError("N must be positive")
    if N > MAX_N:
        raise BudgetError(f"N={N} exceeds the scan budget 2^34")
    if a < 0 or a.bit_length() > 62:
        raise ValueError("a must be a non-negative integer below 2^62")
    d_lo, d_hi = d_window
    bounds = [(lo, min(lo + CHUNK, N)) for lo in range(0, N, CHUNK)]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(lambda b: _scan_chunk(a, b[0], b[1], verify_every), bounds))
    else:
        parts = [_scan_chunk(a, lo, hi, verify_every) for lo, hi in bounds]
    hist = np.sum([p[0] for p in parts], axis=0)
    checked = sum(p[1] for p in parts)
    mismatches = sum(p[2] for p in parts)
    estimates = []
    inside = 0
    for d in range(d_lo, d_hi + 1):
        idx = d + _OFFSET
        c = int(hist[idx]) if 0 <= idx < len(hist) else 0
        inside += c
        estimates.append(DensityEstimate(a, d, N, c))
    return DensityScan(a, N, (d_lo, d_hi), estimates, N - inside, checked, mismatches)
