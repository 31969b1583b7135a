import itertools
import math

import pytest

from threshold_lab.sets import SetFamily


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setenv("THRESHOLD_LAB_BACKEND", request.param)
    return request.param


def fam(n, *sets):
    return SetFamily.from_sets(n, [list(s) for s in sets])


def brute_prob_upset(members, p):
    """Sum of mu_p(W) over W containing some member, by itertools enumeration."""
    n = len(p)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        w = sum(b << x for x, b in enumerate(bits))
        if any(m & ~w == 0 for m in members):
            total += math.prod(p[x] if bits[x] else 1 - p[x] for x in range(n))
    return total


def brute_cover_cost(members, q, pool=None):
    """Cheapest collection from ``pool`` (default: every subset) covering every member."""
    n = len(q)
    if pool is None:
        pool = range(1 << n)
    pool = list(pool)
    costs = [math.prod(q[x] for x in range(n) if t >> x & 1) for t in pool]
    best = math.inf
    for r in range(1, len(members) + 1):
        for combo in itertools.combinations(range(len(pool)), r):
            if all(any(pool[c] & ~s == 0 for c in combo) for s in members):
                best = min(best, sum(costs[c] for c in combo))
    return best
