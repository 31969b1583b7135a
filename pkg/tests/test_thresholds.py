import math

import pytest

from threshold_lab.caps import CapExceeded, Caps, ValidationError
from threshold_lab.measure import ProbVector, prob_upset_exact
from threshold_lab.thresholds import (
    expectation_threshold,
    kk_bounds,
    kk_gap_report,
    prob_threshold,
)

from conftest import fam

TRIANGLE = fam(3, {0, 1}, {0, 2}, {1, 2})
TOL = 1e-7


def test_triangle_thresholds():
    pc = prob_threshold(TRIANGLE, TOL)
    assert pc.lo <= 0.5 <= pc.hi and pc.hi - pc.lo <= TOL
    qc = expectation_threshold(TRIANGLE, TOL)
    assert qc.lo <= math.sqrt(1 / 6) <= qc.hi


def test_single_set_threshold():
    n = 4
    target = 2 ** (-1 / n)
    f = fam(n, set(range(n)))
    pc = prob_threshold(f, TOL)
    qc = expectation_threshold(f, TOL)
    for r in (pc, qc):
        assert r.lo <= target <= r.hi


def test_bracket_invariants():
    f = fam(5, {0, 1}, {2, 3, 4}, {1, 4})
    pc = prob_threshold(f, 1e-5)
    n = f.n
    assert prob_upset_exact(f, ProbVector.uniform(n, pc.lo)) <= 0.5
    assert prob_upset_exact(f, ProbVector.uniform(n, pc.hi)) > 0.5
    assert pc.hi - pc.lo <= 1e-5


def test_minimal_invariance():
    a = fam(4, {0, 1}, {2})
    b = fam(4, {0, 1}, {2}, {0, 1, 3}, {2, 3})
    assert prob_threshold(a, TOL) == prob_threshold(b, TOL)


def test_trivial_rejected():
    with pytest.raises(ValidationError):
        prob_threshold(fam(3), TOL)
    with pytest.raises(ValidationError):
        expectation_threshold(fam(3, set()), TOL)
    with pytest.raises(ValidationError):
        prob_threshold(TRIANGLE, 0)


def test_exact_cap_and_fallback():
    with pytest.raises(CapExceeded):
        prob_threshold(TRIANGLE, TOL, caps=Caps(exact_n=2))
    r = prob_threshold(TRIANGLE, 1e-3, caps=Caps(exact_n=2), mc_fallback=True, trials=20000, seed=1)
    assert r.mode == "monte-carlo"


def test_monte_carlo_mode():
    f = fam(1, {0})
    r = prob_threshold(f, 1e-2, mode="monte-carlo", trials=20000, seed=3)
    assert r.confidence == 0.99
    # the 1/2 crossing can only be localised to about the Hoeffding width
    assert r.lo - 0.05 <= 0.5 <= r.hi + 0.05
    again = prob_threshold(f, 1e-2, mode="monte-carlo", trials=20000, seed=3)
    assert again == r


def test_monte_carlo_unresolved():
    r = prob_threshold(TRIANGLE, 1e-9, mode="monte-carlo", trials=2000, seed=4)
    assert r.unresolved
    assert r.hi - r.lo > 1e-9


def test_kk_bounds_values():
    a, b = kk_bounds(1)
    assert a == pytest.approx(4 * math.log2(7)) and b == pytest.approx(11)
    a, b = kk_bounds(8)
    assert a == pytest.approx(4 * math.log2(56)) and b == pytest.approx(23)


def test_kk_report():
    rep = kk_gap_report(TRIANGLE, TOL)
    assert rep["ell"] == 2
    assert rep["pass"] and rep["ordering_ok"]
    assert rep["ratio_bound"] == pytest.approx(0.5 / math.sqrt(1 / 6), rel=1e-5)
