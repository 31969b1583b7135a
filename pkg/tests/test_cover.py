import itertools
from fractions import Fraction

import numpy as np
import pytest

from threshold_lab.caps import CapExceeded, Caps
from threshold_lab.cover import (
    Candidate,
    candidate_pool,
    coverage,
    exact_cost,
    greedy_cost,
    intersection_closure,
    is_q_small,
    prune_dominated,
    _solve,
)
from threshold_lab.measure import ProbVector, expected_hits, monomial
from threshold_lab.sets import contains_member, minimal_elements

from conftest import brute_cover_cost, fam

TRIANGLE = fam(3, {0, 1}, {0, 2}, {1, 2})


def random_family(rng, n, count, max_size=None):
    max_size = max_size or n
    sets = []
    for _ in range(count):
        size = int(rng.integers(1, max_size + 1))
        sets.append(set(rng.choice(n, size=size, replace=False).tolist()))
    return fam(n, *sets)


def test_examples(backend):
    q = ProbVector.uniform(3, 0.3)
    sol = exact_cost(TRIANGLE, q)
    assert sol.cost == pytest.approx(0.27)
    assert sol.cover.as_sets() == [[0, 1], [0, 2], [1, 2]]
    # at q = 0.6 the three pairs cost 1.08, a single element covers two
    sol = exact_cost(TRIANGLE, ProbVector.uniform(3, 0.6))
    assert sol.cost == pytest.approx(0.6 + 0.36)
    assert exact_cost(fam(2, {0}, {1}), ProbVector((0.2, 0.3))).cost == pytest.approx(0.5)


def test_trivial_families():
    q = ProbVector.uniform(2, 0.5)
    assert exact_cost(fam(2), q).cost == 0
    sol = exact_cost(fam(2, set(), {0}), q)
    assert sol.cost == 1 and sol.cover.as_sets() == [[]]


def test_shared_element_beats_members():
    # five pairs sharing element 0 at q = 0.5: {0} costs 0.5 < 5 * 0.25
    f = fam(6, *({0, x} for x in range(1, 6)))
    sol = exact_cost(f, ProbVector.uniform(6, 0.5))
    assert sol.cost == pytest.approx(0.5) and sol.cover.as_sets() == [[0]]


def test_rational_matches_float():
    qf = ProbVector.uniform(3, 0.3)
    qr = ProbVector.uniform(3, Fraction(3, 10))
    assert exact_cost(TRIANGLE, qr).cost == Fraction(27, 100)
    assert float(exact_cost(TRIANGLE, qr).cost) == pytest.approx(exact_cost(TRIANGLE, qf).cost, abs=1e-15)
    assert exact_cost(TRIANGLE, qr).to_dict()["cost_exact"] == "27/100"


def test_brute_force_oracle_full_pool():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        f = random_family(rng, n, int(rng.integers(1, 4)))
        q = rng.uniform(0.05, 0.95, n)
        got = exact_cost(f, ProbVector(tuple(q))).cost
        assert got == pytest.approx(brute_cover_cost(minimal_elements(f).members, q), abs=1e-12)


def test_closure_pool_equals_pruned_full_pool():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        f = minimal_elements(random_family(rng, n, int(rng.integers(1, 6))))
        q = ProbVector(tuple(rng.uniform(0.05, 0.95, n)))
        targets = f.members
        useful = [Candidate(m, coverage(m, targets), monomial(m, q)) for m in range(1 << n)]
        full = prune_dominated([c for c in useful if c.cov])
        pool = candidate_pool(targets, q)
        assert {(c.cov, c.cost) for c in pool} == {(c.cov, c.cost) for c in full}


def test_closure_cap():
    targets = [(1 << 40) - 1 ^ (1 << i) for i in range(12)]
    with pytest.raises(CapExceeded):
        intersection_closure(targets, 100)


def test_subadditive_and_monotone():
    rng = np.random.default_rng(8)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        a = random_family(rng, n, 3)
        b = random_family(rng, n, 3)
        q = rng.uniform(0.05, 0.9, n)
        pq = ProbVector(tuple(q))
        union = a.with_members(a.members + b.members)
        assert exact_cost(union, pq).cost <= exact_cost(a, pq).cost + exact_cost(b, pq).cost + 1e-12
        bigger = ProbVector(tuple(np.minimum(q + 0.05, 0.99)))
        assert exact_cost(a, pq).cost <= exact_cost(a, bigger).cost + 1e-12


def test_bounds_and_witness():
    rng = np.random.default_rng(21)
    for _ in range(40):
        n = int(rng.integers(2, 8))
        f = random_family(rng, n, int(rng.integers(1, 7)))
        q = ProbVector(tuple(rng.uniform(0.05, 0.95, n)))
        sol = exact_cost(f, q)
        assert sol.cost <= min(1.0, expected_hits(minimal_elements(f), q)) + 1e-12
        assert sol.cost == pytest.approx(expected_hits(sol.cover, q), abs=1e-15)
        for s in f.members:
            assert contains_member(sol.cover, s)
        g = greedy_cost(f, q)
        assert g.cost >= sol.cost - 1e-12
        for s in f.members:
            assert contains_member(g.cover, s)


def test_branch_and_bound_matches_dp():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(3, 8))
        f = random_family(rng, n, int(rng.integers(1, 8)))
        q = ProbVector(tuple(rng.uniform(0.05, 0.95, n)))
        dp = exact_cost(f, q)
        bb = exact_cost(f, q, Caps(dp_members=0))
        assert bb.method == "branch-and-bound"
        assert bb.cost == pytest.approx(dp.cost, abs=1e-12)


def test_branch_and_bound_rational():
    q = ProbVector.uniform(3, Fraction(3, 5))
    assert exact_cost(TRIANGLE, q, Caps(dp_members=0)).cost == exact_cost(TRIANGLE, q).cost == Fraction(24, 25)


def test_node_cap():
    rng = np.random.default_rng(0)
    f = random_family(rng, 12, 12, 4)
    with pytest.raises(CapExceeded):
        exact_cost(f, ProbVector.uniform(12, 0.5), Caps(dp_members=0, bb_nodes=1))


def test_is_q_small_examples():
    assert is_q_small(TRIANGLE, ProbVector.uniform(3, 0.3)) == (True, pytest.approx(0.27))
    small, cost = is_q_small(fam(3, {0, 1, 2}), ProbVector.uniform(3, 0.9))
    assert not small and cost == pytest.approx(0.729)
    assert is_q_small(fam(2, {0}), ProbVector((Fraction(1, 2), Fraction(1, 2)))) == (True, Fraction(1, 2))


def test_dp_backends_agree(monkeypatch):
    rng = np.random.default_rng(13)
    cases = [(random_family(rng, 8, 10, 3), ProbVector(tuple(rng.uniform(0.1, 0.9, 8)))) for _ in range(10)]
    out = {}
    for b in ("numba", "numpy"):
        monkeypatch.setenv("THRESHOLD_LAB_BACKEND", b)
        _solve.cache_clear()
        out[b] = [exact_cost(f, q) for f, q in cases]
    for a, b in zip(out["numba"], out["numpy"]):
        assert a.cost == b.cost and a.cover == b.cover


def test_every_subset_of_small_ground():
    # all antichains on 3 points against the brute force
    q = [0.2, 0.5, 0.7]
    pv = ProbVector(tuple(q))
    for r in range(1, 4):
        for members in itertools.combinations(range(1, 8), r):
            f = minimal_elements(fam(3).with_members(members))
            assert exact_cost(f, pv).cost == pytest.approx(brute_cover_cost(f.members, q), abs=1e-12)


def test_float_then_rational_not_confused():
    f = fam(2, {0}, {1})
    assert isinstance(exact_cost(f, ProbVector((0.5, 0.25))).cost, float)
    assert exact_cost(f, ProbVector((Fraction(1, 2), Fraction(1, 4)))).cost == Fraction(3, 4)
