"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from digitcorr.charfn import CONSTS, charfn_eval, enumerate_type_sum, exact_fourier, extract_AB, weight_bound
from digitcorr.cltlab import ExperimentPlan, cusick_scan, run_clt
from digitcorr.corrmeasure import DigitString, measure_of, measure_table, moment, variance_closed_form
from digitcorr.ergodic import SourceSpec, analytic_F, asymptotic_variance, f_values, truncation_weight
from digitcorr.oracle import density_scan

SEED = 42
CLT_SOURCES = {
    "bernoulli(1/2)": SourceSpec.bernoulli(0.5, SEED),
    "markov(0.3,0.6)": SourceSpec.markov(0.3, 0.6, SEED),
}
_CLT_CACHE: dict = {}


def clt_report(name: str, jobs: int = 1):
    key = (name, jobs)
    if key not in _CLT_CACHE:
        _CLT_CACHE[key] = run_clt(ExperimentPlan(CLT_SOURCES[name], jobs=jobs))
    return _CLT_CACHE[key]


def test_c1_exact_structure(verdict):
    t0 = time.perf_counter()
    table = measure_table(1 << 11)
    recursion = all(
        table[2 * a] == table[a]
        and all(
            table[2 * a + 1](d) == (table[a](d - 1) + table[a + 1](d + 1)).halve()
            for d in range(min(table[a].D, table[a + 1].D) - 3, table[2 * a + 1].d_max + 3)
        )
        for a in range(1, 1 << 10)
    )
    fold = all(measure_of(a) == table[a] for a in range(0, 1 << 11, 7))
    mass_mean = all(mu.mass() == 1 and moment(mu, 1) == 0 for mu in table)
    var = all(variance_closed_form(a) == moment(table[a], 2) for a in range(1, 1 << 10))
    var1 = moment(table[1], 2) == 2
    rng = random.Random(SEED)
    padding = True
    for _ in range(200):
        a = rng.getrandbits(rng.randint(1, 60))
        ds = DigitString.from_int(a).padded(rng.randint(1, 12))
        padding &= measure_of(ds) == measure_of(a) and variance_closed_form(ds) == variance_closed_form(a)
    elapsed = time.perf_counter() - t0
    ok = recursion and fold and mass_mean and var and var1 and padding and elapsed < 60
    verdict(
        "1 exact structure",
        ok,
        f"recursion={recursion} mass/mean={mass_mean} variance={var} Var(mu_1)=2:{var1} "
        f"leading zeros={padding} runtime={elapsed:.1f}s",
    )


def test_c2_characteristic_function(verdict):
    theta = np.linspace(-np.pi, np.pi, 1000)
    err1 = float(np.max(np.abs(charfn_eval(1, theta) - np.exp(1j * theta) / (2 - np.exp(-1j * theta)))))
    err2 = max(float(np.max(np.abs(charfn_eval(a, theta) - exact_fourier(measure_of(a), theta)))) for a in range(64))
    verdict("2 characteristic function", err1 <= 1e-12 and err2 <= 1e-10, f"mu_1 err={err1:.2e}, a<64 err={err2:.2e}")


def test_c3_matrix_machinery(verdict):
    rng = np.random.default_rng(SEED)
    prefixes = [rng.integers(0, 2, 16).tolist() for _ in range(20)]
    agree = zero_col = True
    for X in prefixes:
        for n in range(1, 13):
            for r in range(0, 4):
                if r > n:
                    continue
                col = CONSTS.conj(enumerate_type_sum(X, n, 0, r).matrix)[:, 0]
                agree &= (col[0], col[1]) == extract_AB(X, n, r)
                if r:
                    M = CONSTS.conj(enumerate_type_sum(X, n, 0, r, trim=True).matrix)
                    zero_col &= M[0, 1] == 0 and M[1, 1] == 0
    X = prefixes[0]
    p0 = all(enumerate_type_sum(X, n, 0, q).norm_sum <= math.comb(n, q) for n in range(4, 15) for q in (1, 2, 3))
    worst = {}
    bounded = True
    for p, q in [(1, 1), (2, 1), (1, 2)]:
        # C(n,q)/n^q <= 1/q!, so the ratio is capped by a constant independent of n
        cap = math.prod(2 * (q + k) for k in range(1, p + 1)) / math.factorial(q)
        ratios = [float(enumerate_type_sum(X, n, p, q).norm_sum) / n**q for n in range(4, 15)]
        worst[(p, q)] = max(ratios)
        bounded &= all(
            enumerate_type_sum(X, n, p, q).norm_sum <= weight_bound(n, p, q) for n in range(4, 15)
        ) and max(ratios) <= cap
    verdict(
        "3 matrix machinery",
        agree and zero_col and p0 and bounded,
        f"enumeration=extraction:{agree} zero second column:{zero_col} p=0 bound:{p0} "
        f"max norm/n^q {', '.join(f'{k}={v:.3f}' for k, v in worst.items())}",
    )


def test_c4_ergodic(verdict):
    n = 10**6
    deltas = {}
    for name, src in [("bernoulli(0.3)", SourceSpec.bernoulli(0.3, SEED)), ("markov(0.3,0.6)", SourceSpec.markov(0.3, 0.6, SEED))]:
        stream = src.stream()
        deltas[name] = max(abs(float(f_values(stream, i, n - i).mean()) - analytic_F(src, i)) for i in range(1, 11))
    V = asymptotic_variance(SourceSpec.bernoulli(0.5)).V
    trunc = all(truncation_weight(P, r) == (1 - Fraction(1, 2**P)) ** r for P in range(1, 11) for r in (1, 2, 3))
    ok = all(d <= 0.02 for d in deltas.values()) and abs(V - 0.5) <= 2**-40 and trunc
    verdict(
        "4 ergodic",
        ok,
        f"max dF {', '.join(f'{k}={v:.4f}' for k, v in deltas.items())}; |V-1/2|={abs(V - 0.5):.2e}; truncation identity={trunc}",
    )


def test_c5_variance_growth(verdict):
    n = 10**5
    src = SourceSpec.bernoulli(0.5, SEED)
    ratio = float(variance_closed_form(src.stream().digits(n))) / n
    V = asymptotic_variance(src).V
    rel = abs(ratio / V - 1)
    verdict("5 variance growth", rel <= 0.05, f"Var/n={ratio:.5f}, V={V:.5f}, relative gap={rel:.4f}")


def _trend_down(values) -> tuple[bool, float]:
    """Least-squares slope of log|v| against log2 n, negative and last below first."""
    v = np.abs(np.asarray(values))
    slope = float(np.polyfit(np.arange(len(v)), np.log(np.maximum(v, 1e-300)), 1)[0])
    return slope < 0 and v[-1] < v[0], slope


@pytest.mark.parametrize("name", list(CLT_SOURCES))
def test_c6_clt(name, verdict):
    rep = clt_report(name)
    grid = [pt.n for pt in rep.points]
    last = rep.points[-1]
    m2, m4, m6 = last.renormalized[2], last.renormalized[4], last.renormalized[6]
    windows = 0.9 <= m2 <= 1.1 and 2.5 <= m4 <= 3.5 and 11 <= m6 <= 19
    odd_ok = True
    odd_notes = []
    for r in (3, 5):
        seq = rep.renormalized(r)
        down, slope = _trend_down(seq)
        strict = all(abs(b) < abs(a) for a, b in zip(seq, seq[1:]))
        odd_ok &= abs(seq[-1]) <= 0.3 and down
        odd_notes.append(f"|m{r}|={abs(seq[-1]):.4f} slope={slope:.2f} strictly monotone={strict}")
    k12 = rep.points[grid.index(1 << 12)]
    ks = rep.ks()
    ks_ok = k12.ks_source == "exact" and k12.ks <= 0.08 and all(b < a for a, b in zip(ks, ks[1:]))
    verdict(
        f"6 CLT {name}",
        windows and odd_ok and ks_ok,
        f"m2={m2:.4f} m4={m4:.4f} m6={m6:.3f}; {'; '.join(odd_notes)}; KS(2^12)={k12.ks:.5f} "
        f"KS decreasing={all(b < a for a, b in zip(ks, ks[1:]))}",
    )


def test_c7_oracle(verdict):
    worst = 0.0
    complete = True
    mismatches = 0
    for a in range(1, 65):
        mu = measure_of(a)
        scan = density_scan(a, 1 << 22, (-40, 40))
        counts = scan.counts()
        complete &= sum(counts.values()) + scan.out_of_window == scan.N
        mismatches += scan.mismatches
        for d in range(-10, a.bit_count() + 1):
            worst = max(worst, abs(counts[d] / scan.N - float(mu(d))))
    verdict(
        "7 oracle",
        worst <= 5e-3 and complete and mismatches == 0,
        f"max |density - mu_a(d)|={worst:.2e}, window complete={complete}, Kummer mismatches={mismatches}",
    )


def test_c8_cusick(verdict):
    rep = cusick_scan(1 << 16)
    ok = not rep.violations and not rep.reversal_mismatches and rep.trajectory_decreasing
    verdict(
        "8 Cusick",
        ok,
        f"min c_a={rep.minimum} ({rep.minimum_float:.5f}) at a={rep.argmin}, violations={len(rep.violations)}, "
        f"reversal mismatches={len(rep.reversal_mismatches)}/{rep.reversal_checked}, "
        f"c(a_k) k=1..12 non-increasing toward 1/2={rep.trajectory_decreasing} "
        f"({rep.trajectory[0][2]:.4f} -> {rep.trajectory[-1][2]:.4f})",
    )


def test_c9_determinism(verdict):
    same = True
    for name in CLT_SOURCES:
        first = clt_report(name).to_csv()
        again = run_clt(ExperimentPlan(CLT_SOURCES[name], jobs=1)).to_csv()
        threaded = clt_report(name, jobs=4).to_csv()
        same &= first == again == threaded
    verdict("9 determinism", same, "CLT CSVs byte-identical across repeat runs and jobs=1 vs jobs=4")
