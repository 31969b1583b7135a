import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from threshold_lab.caps import CapExceeded, Caps, ValidationError
from threshold_lab.measure import (
    ProbVector,
    amplify,
    expected_hits,
    prob_upset_exact,
    prob_upset_mc,
    sample,
    sample_many,
    substream,
)
from threshold_lab.sets import minimal_elements

from conftest import brute_prob_upset, fam

TRIANGLE = fam(3, {0, 1}, {0, 2}, {1, 2})


def test_probvector_rejects_boundary():
    for bad in [(0.0, 0.5), (0.5, 1.0), (1.2,), ()]:
        with pytest.raises(ValidationError):
            ProbVector(bad)


def test_sample_marginals():
    q = ProbVector((0.5, 0.5))
    s = sample_many(q, substream(3, 99), 100_000)
    for x in range(2):
        assert abs(((s >> x) & 1).mean() - 0.5) < 0.01


def test_sample_near_one():
    q = ProbVector.uniform(3, 0.999)
    s = sample_many(q, substream(1, 99), 10_000)
    sizes = [bin(int(m)).count("1") for m in s]
    assert np.mean(sizes) > 2.99


def test_sample_deterministic():
    q = ProbVector.uniform(5, 0.4)
    assert sample(q, substream(42, 1)) == sample(q, substream(42, 1))


def test_expected_hits_examples():
    assert expected_hits(fam(3, {0, 1}, {1, 2}), ProbVector.uniform(3, 0.5)) == pytest.approx(0.5)
    assert expected_hits(fam(2, set()), ProbVector.uniform(2, 0.5)) == 1.0
    assert expected_hits(fam(2, {0}), ProbVector((0.3, 0.9))) == pytest.approx(0.3)


def test_expected_hits_rational():
    q = ProbVector.uniform(3, Fraction(1, 2))
    assert expected_hits(fam(3, {0, 1}, {1, 2}), q) == Fraction(1, 2)


def test_prob_exact_examples(backend):
    assert prob_upset_exact(fam(1, {0}), ProbVector((0.3,))) == pytest.approx(0.3)
    assert prob_upset_exact(fam(4, {0, 1, 2, 3}), ProbVector.uniform(4, 0.6)) == pytest.approx(0.6**4)
    # oracle: all 8 outcomes, qualifying iff |W| >= 2
    assert brute_prob_upset([3, 5, 6], [0.5] * 3) == 0.5
    assert prob_upset_exact(TRIANGLE, ProbVector.uniform(3, 0.5)) == pytest.approx(0.5, abs=1e-15)


def test_prob_exact_cap():
    with pytest.raises(CapExceeded, match="Monte Carlo"):
        prob_upset_exact(fam(5, {0}), ProbVector.uniform(5, 0.5), Caps(exact_n=4))


def test_prob_exact_monotone_grid():
    f = fam(4, {0, 1}, {2}, {1, 3})
    grid = [0.1, 0.4, 0.7, 0.9]
    base = [0.3, 0.5, 0.2, 0.6]
    for x in range(4):
        vals = []
        for g in grid:
            p = list(base)
            p[x] = g
            vals.append(prob_upset_exact(f, ProbVector(tuple(p))))
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_prob_exact_minimal_invariance_and_union_bound():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        members = [set(np.flatnonzero(rng.random(n) < 0.4)) or {0} for _ in range(4)]
        f = fam(n, *members)
        p = ProbVector(tuple(rng.uniform(0.05, 0.95, n)))
        a = prob_upset_exact(f, p)
        assert a == pytest.approx(prob_upset_exact(minimal_elements(f), p), abs=1e-14)
        assert a <= expected_hits(minimal_elements(f), p) + 1e-12


def test_amplify_values():
    assert amplify(ProbVector((0.5,)), 1)[0] == pytest.approx(0.5)
    assert amplify(ProbVector((0.5,)), 2)[0] == pytest.approx(0.75)
    assert amplify(ProbVector((0.1,)), 11)[0] == pytest.approx(1 - 0.9**11, rel=1e-14)
    assert amplify(ProbVector((Fraction(1, 2),)), 2)[0] == Fraction(3, 4)
    assert amplify(ProbVector((0.3,)), Fraction(9, 2))[0] == pytest.approx(1 - 0.7**4.5)
    with pytest.raises(ValidationError):
        amplify(ProbVector((0.3,)), 0.5)


def test_amplify_matches_union_of_samples():
    q = ProbVector((0.1,))
    rng = substream(7, 99)
    union = np.zeros(50_000, dtype=np.int64)
    for _ in range(11):
        union |= sample_many(q, rng, union.size)
    assert abs(union.mean() - (1 - 0.9**11)) < 0.01


def test_union_law_chi_square():
    q = ProbVector((0.1, 0.25, 0.05, 0.3))
    L = 3
    draws = 100_000
    rng = substream(2024, 99)
    union = np.zeros(draws, dtype=np.int64)
    for _ in range(L):
        union |= sample_many(q, rng, draws)
    observed = np.bincount(union, minlength=16)
    p = amplify(q, L).as_array()
    expected = np.array([
        math.prod(p[x] if w >> x & 1 else 1 - p[x] for x in range(4)) for w in range(16)
    ]) * draws
    assert stats.chisquare(observed, expected).pvalue > 0.001


def test_mc_examples():
    f = fam(1, {0})
    est = prob_upset_mc(f, ProbVector((0.3,)), 100_000, seed=1)
    assert abs(est.point - 0.3) < 0.02
    assert est.lo <= est.point <= est.hi
    one = prob_upset_mc(f, ProbVector((0.3,)), 1, seed=1)
    assert one.point in (0.0, 1.0)
    assert one.hi - one.lo >= 1 - 1e-12
    assert prob_upset_mc(f, ProbVector((0.3,)), 5000, seed=9) == prob_upset_mc(f, ProbVector((0.3,)), 5000, seed=9)
    with pytest.raises(ValidationError):
        prob_upset_mc(f, ProbVector((0.3,)), 0, seed=1)


def test_mc_thread_independent():
    p = ProbVector.uniform(3, 0.4)
    a = prob_upset_mc(TRIANGLE, p, 30_000, seed=5, threads=1)
    b = prob_upset_mc(TRIANGLE, p, 30_000, seed=5, threads=4)
    assert a == b


def test_mc_calibration():
    p = ProbVector.uniform(3, 0.35)
    exact = prob_upset_exact(TRIANGLE, p)
    inside = sum(
        est.lo <= exact <= est.hi
        for est in (prob_upset_mc(TRIANGLE, p, 500, seed=s, confidence=0.9) for s in range(200))
    )
    assert inside / 200 >= 0.9


def test_bad_seed():
    with pytest.raises(ValidationError):
        substream(-1, 0)
