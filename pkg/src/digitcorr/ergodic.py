"""Binary ergodic sources and Birkhoff sums of the lag functionals f_i."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .corrmeasure import DigitString

BLOCK = 1 << 16
DEFAULT_TRUNCATION = 40


class SourceError(ValueError):
    """Malformed or unusable source description."""


@dataclass(frozen=True)
class SourceSpec:
    """A shift-invariant ergodic source on {0,1}^N plus the seed of its sample point.

    ``params`` depends on ``kind``:
    bernoulli -> (p,), markov -> (P, pi) with P a 2x2 row-stochastic tuple,
    periodic -> (word,), file -> (path,).
    """

    kind: str
    params: tuple
    seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise SourceError("seed must fit in 64 bits")
        if self.kind == "bernoulli":
            (p,) = self.params
            if not 0.0 <= p <= 1.0:
                raise SourceError(f"bernoulli p={p} outside [0, 1]")
        elif self.kind == "markov":
            P, pi = self.params
            P = np.asarray(P, dtype=float)
            pi = np.asarray(pi, dtype=float)
            if P.shape != (2, 2) or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12):
                raise SourceError("markov transition matrix must be 2x2 row-stochastic")
            if np.max(np.abs(pi @ P - pi)) > 1e-12 or abs(pi.sum() - 1) > 1e-12:
                raise SourceError("pi is not stationary for P")
        elif self.kind == "periodic":
            (word,) = self.params
            if not word or set(word) - {"0", "1"}:
                raise SourceError("periodic word must be a nonempty string of 0/1")
        elif self.kind == "file":
            pass
        else:
            raise SourceError(f"unknown source kind {self.kind!r}")

    # -- constructors --------------------------------------------------------

    @classmethod
    def bernoulli(cls, p: float, seed: int = 0) -> "SourceSpec":
        return cls("bernoulli", (float(p),), seed)

    @classmethod
    def markov(cls, p01: float, p10: float, seed: int = 0) -> "SourceSpec":
        """Two-state chain flipping 0->1 with probability p01 and 1->0 with p10."""
        if p01 + p10 <= 0:
            raise SourceError("markov chain with p01 = p10 = 0 is not ergodic")
        P = ((1.0 - p01, p01), (p10, 1.0 - p10))
        pi = (p10 / (p01 + p10), p01 / (p01 + p10))
        return cls("markov", (P, pi), seed)

    @classmethod
    def periodic(cls, word: str, seed: int = 0) -> "SourceSpec":
        return cls("periodic", (word,), seed)

    @classmethod
    def file(cls, path, seed: int = 0) -> "SourceSpec":
        return cls("file", (str(path),), seed)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SourceSpec":
        """Parse ``bernoulli:<p>``, ``markov:<p01>,<p10>``, ``periodic:<bits>`` or ``file:<path>``."""
        kind, sep, arg = text.partition(":")
        if not sep or not arg:
            raise SourceError(f"source descriptor {text!r} must look like kind:args")
        try:
            if kind == "bernoulli":
                return cls.bernoulli(float(arg), seed)
            if kind == "markov":
                p01, p10 = (float(x) for x in arg.split(","))
                return cls.markov(p01, p10, seed)
        except ValueError as exc:
            if isinstance(exc, SourceError):
                raise
            raise SourceError(f"bad numbers in source descriptor {text!r}") from None
        if kind == "periodic":
            return cls.periodic(arg, seed)
        if kind == "file":
            return cls.file(arg, seed)
        raise SourceError(f"unknown source kind {kind!r} (expected bernoulli, markov, periodic, file)")

    def describe(self) -> str:
        if self.kind == "bernoulli":
            return f"bernoulli:{self.params[0]!r}"
        if self.kind == "markov":
            P = self.params[0]
            return f"markov:{P[0][1]!r},{P[1][0]!r}"
        return f"{self.kind}:{self.params[0]}"

    @property
    def has_closed_form(self) -> bool:
        return self.kind != "file"

    def stream(self) -> "BitStream":
        return BitStream(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox is counter based: every block is an independent, addressable stream
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def _markov_block(u: np.ndarray, P: np.ndarray, x_prev: int) -> np.ndarray:
    """Vectorized two-state chain: bit k+1 is 1 iff u[k] < P[bit k, 1]."""
    c0 = u < P[0, 1]
    c1 = u < P[1, 1]
    reset = c0 == c1  # next bit does not depend on the current one
    flip = c0 & ~c1
    idx = np.arange(len(u))
    last = np.maximum.accumulate(np.where(reset, idx, -1))
    parity = np.cumsum(flip, dtype=np.int64)
    has = last >= 0
    safe = np.where(has, last, 0)
    base = np.where(has, c0[safe], bool(x_prev))
    since = parity - np.where(has, parity[safe], 0)
    return (base ^ (since & 1).astype(bool)).astype(np.uint8)


class BitStream:
    """Deterministic bit sequence X_0, X_1, ... of a source, materialized in blocks.

    Same source and seed give the same bits regardless of how the prefix is
    requested, since block ``b`` only depends on ``(seed, b)`` (and, for
    Markov chains, on the last bit of block ``b - 1``).
    """

    def __init__(self, source: SourceSpec):
        self.source = source
        self._bits = np.empty(0, dtype=np.uint8)
        if source.kind == "file":
            text = Path(source.params[0]).read_text()
            chars = "".join(text.split())
            if set(chars) - {"0", "1"}:
                raise SourceError("bit file may only contain '0', '1' and whitespace")
            self._bits = np.frombuffer(chars.encode(), dtype=np.uint8) - ord("0")

    def __len__(self):
        return len(self._bits)

    def _extend(self, n: int):
        src = self.source
        if src.kind == "file":
            if n > len(self._bits):
                raise SourceError(f"bit file holds {len(self._bits)} bits, {n} requested")
            return
        if src.kind == "periodic":
            w = np.frombuffer(src.params[0].encode(), dtype=np.uint8) - ord("0")
            reps = -(-n // len(w))
            self._bits = np.tile(w, max(reps, 1))
            return
        chunks = [self._bits]
        have = len(self._bits)
        while have < n:
            b = have // BLOCK
            rng = _block_rng(src.seed, b)
            u = rng.random(BLOCK)
            if src.kind == "bernoulli":
                block = (u < src.params[0]).astype(np.uint8)
            else:
                P = np.asarray(src.params[0], dtype=float)
                pi = np.asarray(src.params[1], dtype=float)
                if b == 0:
                    x0 = int(u[0] < pi[1])
                    block = np.concatenate([[x0], _markov_block(u[1:], P, x0)]).astype(np.uint8)
                else:
                    block = _markov_block(u, P, int(chunks[-1][-1]))
            chunks.append(block)
            have += BLOCK
        self._bits = np.concatenate(chunks)

    def prefix(self, n: int) -> np.ndarray:
        """X_0..X_{n-1} as uint8 (read-only view)."""
        if n > len(self._bits):
            self._extend(n)
        out = self._bits[:n]
        out.flags.writeable = False
        return out

    def __getitem__(self, k: int) -> int:
        return int(self.prefix(k + 1)[k])

    def digits(self, n: int) -> DigitString:
        """Digits of a_X(n) = sum_{k<=n} X_k 2^k (n + 1 digits)."""
        return DigitString(tuple(self.prefix(n + 1).tolist()))


def _bits_of(X, n: int) -> np.ndarray:
    if isinstance(X, BitStream):
        return X.prefix(n)
    arr = np.asarray(X, dtype=np.uint8)
    if len(arr) < n:
        raise ValueError(f"need {n} bits, have {len(arr)}")
    return arr[:n]


def f_indicator(X, i: int, k: int) -> int:
    """f_i(sigma^k X): 1 iff X_k != X_{k+i}."""
    bits = _bits_of(X, k + i + 1)
    return int(bits[k] != bits[k + i])


def f_values(X, i: int, count: int) -> np.ndarray:
    """f_i(sigma^k X) for k = 0..count-1."""
    bits = _bits_of(X, count + i)
    return (bits[:count] != bits[i : i + count]).astype(np.int64)


def analytic_F(source: SourceSpec, i: int) -> float:
    """Integral of f_i under the source measure."""
    if i < 1:
        raise ValueError("lag i must be >= 1")
    if source.kind == "bernoulli":
        p = source.params[0]
        return 2.0 * p * (1.0 - p)
    if source.kind == "markov":
        P = np.asarray(source.params[0], dtype=float)
        pi = np.asarray(source.params[1], dtype=float)
        Pi = np.linalg.matrix_power(P, i)
        return float(pi[0] * Pi[0, 1] + pi[1] * Pi[1, 0])
    if source.kind == "periodic":
        w = np.frombuffer(source.params[0].encode(), dtype=np.uint8)
        return float(np.mean(w != np.roll(w, -i)))
    raise SourceError(f"no closed form for {source.kind} sources")


@dataclass
class CorrelationTable:
    F: dict[int, float]
    mode: str
    V: float
    truncation: int
    remainder_bound: float
    n: int | None = None
    degenerate: bool = field(init=False)

    def __post_init__(self):
        self.degenerate = not self.V > 0


def asymptotic_variance(
    source: SourceSpec, P: int = DEFAULT_TRUNCATION, mode: str = "analytic", n: int | None = None
) -> CorrelationTable:
    """V = sum_{i <= P} F_i / 2^i, either from closed forms or from Birkhoff averages over n bits."""
    if not 1 <= P <= 60:
        raise ValueError("truncation P must be in [1, 60]")
    if mode == "analytic":
        F = {i: analytic_F(source, i) for i in range(1, P + 1)}
    elif mode == "empirical":
        if n is None or n <= P:
            raise ValueError("empirical mode needs n > P")
        stream = source.stream()
        F = {i: float(f_values(stream, i, n - i).mean()) for i in range(1, P + 1)}
    else:
        raise ValueError(f"unknown mode {mode!r}")
    V = math.fsum(F[i] * 2.0**-i for i in range(1, P + 1))
    return CorrelationTable(F, mode, V, P, 2.0**-P, n)


def truncation_weight(P: int, r: int):
    """sum over (p_1..p_r) in [1, P]^r of 2^-(p_1+...+p_r), exactly, by brute force."""
    return sum(
        (Fraction(1, 2 ** sum(ps)) for ps in itertools.product(range(1, P + 1), repeat=r)),
        Fraction(0),
    )


def s_n_sum(X, n: int, p) -> int:
    """S_n(X, p_1..p_r) with the index pairing

        sum_{j_1 < ... < j_r <= n-1} f_{p_1}(sigma^{p_2+...+p_r+j_r} X) ... f_{p_r}(sigma^{j_1} X)

    computed by a prefix-sum pass per level, O(n r).
    """
    p = tuple(int(x) for x in p)
    r = len(p)
    if r == 0 or r > 4 or min(p) < 1:
        raise ValueError("need 1 <= r <= 4 lags, all >= 1")
    bits = _bits_of(X, n + sum(p))
    exact_ints = math.comb(n, r) >= 2**62
    dtype = object if exact_ints else np.int64
    # level l (1-based) places j_l and uses f_{p_{r+1-l}} shifted by p_{r+2-l} + ... + p_r
    acc = None
    for l in range(1, r + 1):
        k = r + 1 - l
        offset = sum(p[k:])
        lag = p[k - 1]
        phi = (bits[offset : offset + n] != bits[offset + lag : offset + lag + n]).astype(dtype)
        if acc is None:
            acc = phi
        else:
            prev = np.concatenate([np.zeros(1, dtype=dtype), np.cumsum(acc)[:-1]])
            acc = phi * prev
    return int(acc.sum())


def s_n_bruteforce(X, n: int, p) -> int:
    """Direct enumeration of S_n over ordered index tuples (small n only)."""
    p = tuple(p)
    r = len(p)
    bits = _bits_of(X, n + sum(p)).tolist()
    total = 0
    for js in itertools.combinations(range(n), r):
        term = 1
        for k in range(1, r + 1):  # f_{p_k} at sigma^{p_{k+1}+...+p_r + j_{r+1-k}}
            pos = sum(p[k:]) + js[r - k]
            term *= int(bits[pos] != bits[pos + p[k - 1]])
        total += term
    return total


@dataclass
class BirkhoffRow:
    n: int
    S: int
    normalized: float
    target: float


def birkhoff_multi_check(source: SourceSpec, p, n_grid) -> list[BirkhoffRow]:
    """S_n / n^r along the grid next to its ergodic limit prod F_{p_j} / r!."""
    p = tuple(p)
    r = len(p)
    target = math.prod(analytic_F(source, x) for x in p) / math.factorial(r)
    stream = source.stream()
    rows = []
    for n in n_grid:
        S = s_n_sum(stream, n, p)
        rows.append(BirkhoffRow(n, S, S / n**r, target))
    return rows
