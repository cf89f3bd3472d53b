"""Characteristic functions of mu_a as 2x2 transfer-matrix products.

The float side evaluates the product pointwise (:func:`charfn_eval`) or as a
truncated power series that yields every moment up to a fixed order
(:func:`moments_via_series`). The exact side tracks the Taylor coefficient
matrices of the constant factors. It sums them over all words of a given type
by brute force (:func:`enumerate_type_sum`) and also extracts the first column
(A_n, B_n) after the change of basis ``P`` in linear time (:func:`extract_AB`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .corrmeasure import DigitString, HybridMeasure
from .dyadic import BudgetError, Dyadic

MAX_SERIES_ORDER = 16
MAX_AB_ORDER = 5
ENUMERATION_BUDGET = 10**7
RESIDUE_TOL = 1e-9


# --------------------------------------------------------------------------
# pointwise evaluation

def phase_matrix(j: int, theta):
    """The matrix hat-A_j(theta); broadcasts over an array of angles (shape (..., 2, 2))."""
    theta = np.asarray(theta, dtype=float)
    ep = 0.5 * np.exp(1j * theta)
    em = 0.5 * np.exp(-1j * theta)
    one = np.ones_like(ep)
    zero = np.zeros_like(ep)
    if j == 0:
        rows = [[one, zero], [ep, em]]
    elif j == 1:
        rows = [[ep, em], [zero, one]]
    else:
        raise ValueError("j must be 0 or 1")
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def mu1_hat(theta):
    """Characteristic function of mu_1: e^{i theta} / (2 - e^{-i theta})."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * theta) / (2.0 - np.exp(-1j * theta))


def charfn_eval(a, theta):
    """hat-mu_a(theta) by multiplying the row vector (1, 0) through the digits, LSB first."""
    ds = DigitString.coerce(a)
    theta = np.asarray(theta, dtype=float)
    ep = 0.5 * np.exp(1j * theta)
    em = 0.5 * np.exp(-1j * theta)
    # row vector (u, v) times hat-A_0 = (u + v ep, v em); times hat-A_1 = (u ep, u em + v)
    u = np.ones_like(ep)
    v = np.zeros_like(ep)
    for digit in ds.digits:
        if digit == 0:
            u, v = u + v * ep, v * em
        else:
            u, v = u * ep, u * em + v
    out = u + v * mu1_hat(theta)
    return out[()] if out.ndim == 0 else out


def exact_fourier(mu: HybridMeasure, theta):
    """sum_d e^{i d theta} mu(d) from an exact measure, tail summed in closed form."""
    theta = np.asarray(theta, dtype=float)
    acc = np.zeros(theta.shape, dtype=complex)
    for d, v in mu.finite_part.items():
        acc += float(v) * np.exp(1j * d * theta)
    if mu.tail_top:
        top = mu.tail_top / (1 << mu.scale)  # mass at D - 1
        z = 0.5 * np.exp(-1j * theta)
        acc += top * np.exp(1j * (mu.D - 1) * theta) / (1.0 - z)
    return acc[()] if acc.ndim == 0 else acc


# --------------------------------------------------------------------------
# truncated power series

@dataclass
class TruncatedSeries:
    """sum_k coeffs[k] theta^k + O(theta^(R+1)) with complex coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c, R: int) -> "TruncatedSeries":
        out = np.zeros(R + 1, dtype=complex)
        out[0] = c
        return cls(out)

    @classmethod
    def exp_i(cls, sign: int, R: int, factor: complex = 1.0) -> "TruncatedSeries":
        """factor * exp(sign * i * theta)."""
        k = np.arange(R + 1)
        return cls(factor * (sign * 1j) ** k / np.array([factorial(x) for x in k], dtype=float))

    def _check(self, other: "TruncatedSeries"):
        if other.order != self.order:
            raise ValueError("series orders differ")

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs + np.eye(1, self.order + 1, 0)[0] * other)
        self._check(other)
        return TruncatedSeries(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs * other)
        self._check(other)
        return TruncatedSeries(np.convolve(self.coeffs, other.coeffs)[: self.order + 1])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs / other)
        self._check(other)
        b = other.coeffs
        if b[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        q = np.zeros_like(self.coeffs)
        for k in range(self.order + 1):
            q[k] = (self.coeffs[k] - np.dot(q[:k], b[k:0:-1])) / b[0]
        return TruncatedSeries(q)

    def multiplier(self) -> np.ndarray:
        """Lower-triangular Toeplitz matrix T with (self * s).coeffs == T @ s.coeffs."""
        R = self.order
        T = np.zeros((R + 1, R + 1), dtype=complex)
        for k in range(R + 1):
            T[k:, k] = self.coeffs[: R + 1 - k]
        return T


@dataclass
class SeriesMatrix:
    """2x2 matrix of truncated series of a common order."""

    entries: list[list[TruncatedSeries]]

    @property
    def order(self) -> int:
        return self.entries[0][0].order

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        e, f = self.entries, other.entries
        return SeriesMatrix(
            [[e[i][0] * f[0][k] + e[i][1] * f[1][k] for k in range(2)] for i in range(2)]
        )

    def apply(self, vec: list[TruncatedSeries]) -> list[TruncatedSeries]:
        e = self.entries
        return [e[i][0] * vec[0] + e[i][1] * vec[1] for i in range(2)]

    def coefficient(self, k: int) -> np.ndarray:
        return np.array([[self.entries[i][j].coeffs[k] for j in range(2)] for i in range(2)])


def phase_series_matrix(j: int, R: int) -> SeriesMatrix:
    """Taylor expansion of hat-A_j to order R."""
    one = TruncatedSeries.constant(1.0, R)
    zero = TruncatedSeries.constant(0.0, R)
    ep = TruncatedSeries.exp_i(+1, R, 0.5)
    em = TruncatedSeries.exp_i(-1, R, 0.5)
    if j == 0:
        return SeriesMatrix([[one, zero], [ep, em]])
    if j == 1:
        return SeriesMatrix([[ep, em], [zero, one]])
    raise ValueError("j must be 0 or 1")


def mu1_series(R: int) -> TruncatedSeries:
    return TruncatedSeries.exp_i(+1, R) / (2.0 - TruncatedSeries.exp_i(-1, R))


def series_charfn(a, R: int) -> TruncatedSeries:
    """Taylor series of hat-mu_a to order R.

    The column vector (1, hat-mu_1) is pushed through hat-A_{a_n}, ..., hat-A_{a_0}.
    After each step the vector is (hat-mu_b, hat-mu_{b+1}) for a prefix b of a,
    so every intermediate coefficient is a scaled moment of a probability
    measure and nothing cancels catastrophically.
    """
    if R < 0 or R > MAX_SERIES_ORDER:
        raise BudgetError(f"series order R={R} outside [0, {MAX_SERIES_ORDER}]")
    ds = DigitString.coerce(a)
    m0 = phase_series_matrix(0, R).entries
    m1 = phase_series_matrix(1, R).entries
    Tp0, Tm0 = m0[1][0].multiplier(), m0[1][1].multiplier()
    Tp1, Tm1 = m1[0][0].multiplier(), m1[0][1].multiplier()
    v0 = TruncatedSeries.constant(1.0, R).coeffs
    v1 = mu1_series(R).coeffs
    for digit in reversed(ds.digits):
        if digit == 0:
            v1 = Tp0 @ v0 + Tm0 @ v1
        else:
            v0 = Tp1 @ v0 + Tm1 @ v1
    return TruncatedSeries(v0)


def moments_via_series(a, R: int) -> np.ndarray:
    """Real moments m_0..m_R of mu_a from the series coefficients: m_r = r! c_r / i^r."""
    c = series_charfn(a, R).coeffs
    r = np.arange(R + 1)
    fact = np.array([float(factorial(x)) for x in r])
    raw = fact * c / (1j) ** r
    scale = np.maximum(1.0, np.abs(raw.real))
    residue = np.abs(raw.imag) / scale
    if np.any(residue > RESIDUE_TOL):
        k = int(np.argmax(residue))
        raise ArithmeticError(f"imaginary residue {residue[k]:.3g} in moment of order {k}")
    return raw.real.copy()


# --------------------------------------------------------------------------
# exact constant matrices

def _dy(x) -> Dyadic:
    return Dyadic.coerce(x) if not isinstance(x, float) else Dyadic(int(x * 2), 1)


def _mat(rows, factor=Dyadic(1)) -> np.ndarray:
    out = np.empty((2, 2), dtype=object)
    for i in range(2):
        for j in range(2):
            out[i, j] = Dyadic.coerce(rows[i][j]) * factor
    return out


HALF = Dyadic(1, 1)


@dataclass(frozen=True)
class ConstMatrixSet:
    """The Taylor coefficient matrices and the trigonalising basis change, all exact."""

    I: dict = field(default_factory=lambda: {
        0: _mat([[2, 0], [1, 1]], HALF), 1: _mat([[1, 1], [0, 2]], HALF)})
    alpha: dict = field(default_factory=lambda: {
        0: _mat([[0, 0], [1, -1]], HALF), 1: _mat([[1, -1], [0, 0]], HALF)})
    beta: dict = field(default_factory=lambda: {
        0: _mat([[0, 0], [1, 1]], HALF), 1: _mat([[1, 1], [0, 0]], HALF)})
    P: np.ndarray = field(default_factory=lambda: _mat([[1, 1], [-1, 1]]))
    P_inv: np.ndarray = field(default_factory=lambda: _mat([[1, -1], [1, 1]], HALF))

    def conj(self, M: np.ndarray) -> np.ndarray:
        return self.P @ M @ self.P_inv

    def I_tilde(self, j: int) -> np.ndarray:
        return self.conj(self.I[j])

    def beta_tilde(self, j: int) -> np.ndarray:
        return self.conj(self.beta[j])


CONSTS = ConstMatrixSet()

# integer versions scaled by 2, indexed [letter][digit]; letters 0=I, 1=alpha, 2=beta
_INT2 = {
    0: {0: ((2, 0), (1, 1)), 1: ((1, 1), (0, 2))},
    1: {0: ((0, 0), (1, -1)), 1: ((1, -1), (0, 0))},
    2: {0: ((0, 0), (1, 1)), 1: ((1, 1), (0, 0))},
}
LETTERS = {"I": 0, "alpha": 1, "beta": 2}


@dataclass(frozen=True)
class SymbolWord:
    """Word over {I, alpha, beta}, stored as letter codes 0/1/2."""

    letters: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def n_alpha(self) -> int:
        return self.letters.count(1)

    @property
    def n_beta(self) -> int:
        return self.letters.count(2)

    def __str__(self):
        return "".join("Iab"[x] for x in self.letters)

    def matrix(self, X) -> np.ndarray:
        """M_X(u): product of the letter matrices indexed by X_0, X_1, ..."""
        M, k = _int_product(self.letters, X)
        return _to_dyadic(M, k)


def _mul2(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _int_product(letters, X):
    """Integer matrix 2^len * M_X(letters) and len."""
    M = ((1, 0), (0, 1))
    for k, code in enumerate(letters):
        M = _mul2(M, _INT2[code][int(X[k])])
    return M, len(letters)


def _to_dyadic(M, k) -> np.ndarray:
    out = np.empty((2, 2), dtype=object)
    for i in range(2):
        for j in range(2):
            out[i, j] = Dyadic(M[i][j], k)
    return out


def _row_norm(M) -> int:
    return max(abs(M[0][0]) + abs(M[0][1]), abs(M[1][0]) + abs(M[1][1]))


@dataclass
class TypeSum:
    matrix: np.ndarray  # object array of Dyadic
    norm_sum: Dyadic
    count: int


def enumerate_type_sum(X, n: int, p: int, q: int, trim: bool = False) -> TypeSum:
    """Sum of M_X(u) and of ||M_X(u)|| over all words with |u| = n, p alphas, q betas.

    The norm is the maximum row l1 norm. With ``trim=True`` trailing I factors
    are dropped from every word before multiplying (these leave the first
    column unchanged after the basis change but not the second).
    """
    if n > 16:
        raise BudgetError("enumeration needs n <= 16")
    k = p + q
    if k > n or p < 0 or q < 0:
        return TypeSum(_to_dyadic(((0, 0), (0, 0)), 0), Dyadic(0), 0)
    words = comb(n, k) * comb(k, p)
    if words > ENUMERATION_BUDGET:
        raise BudgetError(f"{words} words exceed the enumeration budget {ENUMERATION_BUDGET}")
    X = [int(x) for x in X[:n]]
    if len(X) < n:
        raise ValueError("X prefix shorter than n")
    acc = [[0, 0], [0, 0]]
    norm = 0
    count = 0
    for positions in itertools.combinations(range(n), k):
        for alpha_idx in itertools.combinations(range(k), p):
            letters = [0] * n
            for idx, pos in enumerate(positions):
                letters[pos] = 2
            for idx in alpha_idx:
                letters[positions[idx]] = 1
            if trim:
                end = positions[-1] + 1 if positions else 0
                M, L = _int_product(letters[:end], X)
                up = n - L
            else:
                M, L = _int_product(letters, X)
                up = 0
            for i in range(2):
                for j in range(2):
                    acc[i][j] += M[i][j] << up
            norm += _row_norm(M) << up
            count += 1
    return TypeSum(_to_dyadic(acc, n), Dyadic(norm, n), count)


def weight_bound(n: int, p: int, q: int) -> int:
    """Upper bound C(n, q) * prod_{k=1..p} 2 (q + k) for the summed norm of type (alpha^p, beta^q).

    Placing the alphas right to left, each one sits in one of at most q + k
    runs and alpha I^g = 2^-g alpha, so its position contributes at most 2 per run.
    """
    out = comb(n, q)
    for k in range(1, p + 1):
        out *= 2 * (q + k)
    return out


def _signs(X, n: int) -> list[int]:
    X = [int(x) for x in X[:n]]
    if len(X) < n:
        raise ValueError("X prefix shorter than n")
    return [2 * x - 1 for x in X]


def extract_AB(X, n: int, r: int) -> tuple[Dyadic, Dyadic]:
    """First column (A_n(X, 2r), B_n(X, 2r)) of sum P M P^-1 over type (alpha^0, beta^r) words.

    Uses the first-beta decomposition: with g_t and h_t the first column of
    I~_{X_s}...I~_{X_{t-1}} beta~_{X_t},

        A(s, r+1) = sum_{t >= s} g_t(s) A(t+1, r),   B(s, r+1) = sum_{t >= s} h_t(s) A(t+1, r),

    where A(s, r) refers to the suffix X_s..X_{n-1}. The double sums collapse
    to suffix recurrences, so each order costs O(n) exact operations.
    """
    if r < 0 or r > MAX_AB_ORDER:
        raise BudgetError(f"order r={r} outside [0, {MAX_AB_ORDER}]")
    b = _signs(X, n)
    # level 0: empty product, first column (1, 0)
    A = [Dyadic(1)] * (n + 1)
    B = [Dyadic(0)] * (n + 1)
    for _ in range(r):
        A_new = [Dyadic(0)] * (n + 1)
        B_new = [Dyadic(0)] * (n + 1)
        plain = Dyadic(0)  # sum_{t >= s} A(t+1)
        U = Dyadic(0)  # sum_{t >= s} b_t A(t+1) sum_{i=s}^{t-1} b_i 2^(i-t)
        Z = Dyadic(0)  # sum_{t >= s+1} b_t A(t+1) 2^(s-t)
        for s in range(n - 1, -1, -1):
            plain = plain + A[s + 1]
            U = U + Z * b[s]
            A_new[s] = plain.halve() - U.halve()
            B_new[s] = (B_new[s + 1] - A[s + 1] * b[s]).halve()
            Z = (Z + A[s + 1] * b[s]).halve()
        A, B = A_new, B_new
    return A[0], B[0]


def extract_AB_quadratic(X, n: int, r: int) -> tuple[Dyadic, Dyadic]:
    """Same quantity by the literal O(n^2 r) first-beta recursion (reference path)."""
    b = _signs(X, n)
    A = [Dyadic(1)] * (n + 1)
    B = [Dyadic(0)] * (n + 1)
    for _ in range(r):
        A_new = [Dyadic(0)] * (n + 1)
        B_new = [Dyadic(0)] * (n + 1)
        for s in range(n):
            a_acc = Dyadic(0)
            b_acc = Dyadic(0)
            w = Dyadic(0)  # sum_{i=s}^{t-1} b_i 2^(i-t)
            for t in range(s, n):
                g = HALF - (w * b[t]).halve()
                h = Dyadic(-b[t], t - s + 1)
                a_acc = a_acc + g * A[t + 1]
                b_acc = b_acc + h * A[t + 1]
                w = (w + b[t]).halve()
            A_new[s], B_new[s] = a_acc, b_acc
        A, B = A_new, B_new
    return A[0], B[0]


def first_beta_column(X, m: int) -> tuple[Dyadic, Dyadic]:
    """(g_m, h_m): first column of I~_{X_0}...I~_{X_{m-1}} beta~_{X_m}."""
    b = _signs(X, m + 1)
    w = sum((Dyadic(b[i]).shift_scale(i - m) for i in range(m)), Dyadic(0))
    return HALF - (w * b[m]).halve(), Dyadic(-b[m], m + 1)
