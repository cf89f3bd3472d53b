import pytest
from hypothesis import given
from hypothesis import strategies as st

from digitcorr.corrmeasure import measure_of
from digitcorr.dyadic import BudgetError
from digitcorr.oracle import carries, density_scan, digit_delta, popcount


def test_digit_delta_examples():
    assert digit_delta(3, 1) == -1
    assert all(digit_delta(n, 1) == 1 for n in range(0, 200, 2))
    assert digit_delta(0, 0b10110) == 3
    with pytest.raises(ValueError):
        digit_delta(-1, 2)


@given(st.integers(0, 2**70), st.integers(0, 2**70))
def test_kummer_identity(n, a):
    assert digit_delta(n, a) == popcount(a) - carries(n, a)


def test_carries_small():
    assert carries(1, 1) == 1
    assert carries(7, 1) == 3
    assert carries(5, 2) == 0


def test_a1_densities():
    scan = density_scan(1, 1 << 20)
    c = scan.counts()
    assert c[1] / scan.N == 0.5
    assert abs(c[0] / scan.N - 0.25) <= 2**-10
    assert sum(c.values()) + scan.out_of_window == scan.N
    assert scan.out_of_window == 0


def test_a3_against_exact():
    mu = measure_of(3)
    scan = density_scan(3, 1 << 22, (-8, 2))
    for e in scan.estimates:
        assert abs(e.density - float(mu(e.d))) <= 5e-3
    assert scan.mismatches == 0 and scan.checked == (1 << 22) // 1024


def test_window_completeness_with_clipping():
    scan = density_scan(12345, 100003, (-2, 3))
    inside = sum(e.count for e in scan.estimates)
    assert inside + scan.out_of_window == 100003
    assert scan.out_of_window > 0
    assert [e.d for e in scan.estimates] == list(range(-2, 4))


def test_independent_of_jobs_and_chunking():
    one = density_scan(77, (1 << 21) + 12345, jobs=1)
    many = density_scan(77, (1 << 21) + 12345, jobs=4)
    assert one.counts() == many.counts()
    assert (one.checked, one.mismatches) == (many.checked, many.mismatches)


def test_convergence_along_N():
    mu = measure_of(5)
    errs = []
    for N in (1 << 16, 1 << 20, 1 << 24):
        # deep d only: near the top of the window the count is already exact at N = 2^k
        scan = density_scan(5, N, (-20, 2))
        errs.append(max(abs(e.density - float(mu(e.d))) for e in scan.estimates))
    assert errs[0] > errs[1] > errs[2] > 0
    assert errs[-1] < 1e-7


def test_budget():
    with pytest.raises(BudgetError):
        density_scan(1, (1 << 34) + 1)
    with pytest.raises(ValueError):
        density_scan(1, 0)
