import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digitcorr.corrmeasure import (
    DigitString,
    HybridMeasure,
    cusick_c,
    float_measure_of,
    iter_measures,
    measure_of,
    measure_table,
    moment,
    pair_step,
    seed_pair,
    variance_closed_form,
)
from digitcorr.dyadic import Dyadic


def test_digit_string():
    ds = DigitString.from_int(6)
    assert ds.digits == (0, 1, 1)
    assert ds.signs == (-1, 1, 1)
    assert ds.value == 6
    assert DigitString.from_int(6, 5).digits == (0, 1, 1, 0, 0)
    assert ds.padded(2).n == 5 and ds.padded(2).value == 6
    assert DigitString.from_int(6).reversed().value == 3
    with pytest.raises(ValueError):
        DigitString.from_int(8, 3)
    with pytest.raises(ValueError):
        DigitString((0, 2))


def test_seed_measures():
    mu0, mu1 = seed_pair().first, seed_pair().second
    assert mu0(0) == 1 and mu0.mass() == 1
    assert mu1(1) == Dyadic(1, 1)
    assert mu1(0) == Dyadic(1, 2)
    assert mu1(-5) == Dyadic(1, 7)
    assert mu1(2) == 0
    assert measure_of(1) == mu1


def test_mu3_frozen():
    mu = measure_of(3)
    assert mu.finite_part == {2: Dyadic(1, 2), 1: Dyadic(1, 3)}
    assert mu.tail_threshold == 1
    assert mu.tail_coeff == Dyadic(5, 4)
    assert mu(0) == Dyadic(5, 4)
    assert mu(-3) == Dyadic(5, 7)
    assert mu.dump_lines() == ["2\t1/2^2\t0.25", "1\t1/2^3\t0.125", "TAIL 1 5/2^4"]


def test_canonical_form_is_unique():
    # the same law written with a longer explicit window
    a = HybridMeasure.from_parts({1: Dyadic(1, 1), 0: Dyadic(1, 2), -1: Dyadic(1, 3)}, -1, Dyadic(1, 2))
    assert a == measure_of(1)
    assert hash(a) == hash(measure_of(1))


def test_mass_mean_variance_small():
    assert moment(measure_of(1), 2) == 2
    assert moment(measure_of(3), 2) == 3
    for a in range(64):
        mu = measure_of(a)
        assert mu.mass() == 1
        assert moment(mu, 1) == 0


def test_recursion_pointwise():
    table = measure_table(512)
    for a in range(1, 256):
        mu_a, mu_b = table[a], table[a + 1]
        assert table[2 * a] == mu_a
        odd = table[2 * a + 1]
        lo = min(odd.D, mu_a.D, mu_b.D) - 3
        for d in range(lo, odd.d_max + 3):
            assert odd(d) == (mu_a(d - 1) + mu_b(d + 1)).halve()


def test_table_tree_and_fold_agree():
    table = measure_table(1 << 9)
    tree = dict(iter_measures(9))
    assert sorted(tree) == list(range(1 << 9))
    for a in range(1 << 9):
        assert tree[a] == table[a] == measure_of(a)


def test_pair_step_bad_digit():
    with pytest.raises(ValueError):
        pair_step(seed_pair(), 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**40), st.integers(0, 8))
def test_leading_zero_invariance(a, zeros):
    ds = DigitString.from_int(a).padded(zeros)
    assert measure_of(ds) == measure_of(a)
    assert variance_closed_form(ds) == moment(measure_of(a), 2)


def test_variance_closed_form_matches_moment():
    rng = random.Random(7)
    cases = list(range(1, 300)) + [rng.getrandbits(k) | 1 for k in range(10, 200, 7)]
    for a in cases:
        assert variance_closed_form(a) == moment(measure_of(a), 2)


def test_variance_closed_form_fft_branch():
    rng = np.random.default_rng(3)
    bits = tuple(int(x) for x in rng.integers(0, 2, 4200))
    ds = DigitString(bits)
    mu = measure_of(ds)
    assert mu.mass() == 1
    assert variance_closed_form(ds) == moment(mu, 2)


def test_cusick_values():
    assert cusick_c(1) == Dyadic(3, 2)
    # 1/4 + 1/8 + 5/16
    assert cusick_c(3) == Dyadic(11, 4)
    for a in range(1, 200):
        mu = measure_of(a)
        direct = sum((mu(d) for d in range(0, max(mu.d_max, 0) + 1)), Dyadic(0))
        assert cusick_c(a) == direct


def test_float_measure_agrees_with_exact():
    for a in [1, 3, 12345, 2**61 - 3]:
        mu = measure_of(a)
        D, window, top = float_measure_of(a)
        for i, v in enumerate(window):
            assert abs(v - float(mu(D + i))) < 1e-15
        assert abs(top - float(mu(D - 1))) < 1e-15
        assert abs(window.sum() + 2 * top - 1.0) < 1e-12


def test_cdf_points_and_to_float():
    mu = measure_of(3)
    ds, cdf, top = mu.cdf_points()
    assert ds.tolist() == [1, 2]
    assert cdf.tolist() == [0.75, 1.0]
    assert top == 5 / 16
    xs, ps = mu.to_float(below=10)
    assert xs[-1] == 2 and len(xs) == len(ps)
    assert abs(ps.sum() - 1) < 2**-9
