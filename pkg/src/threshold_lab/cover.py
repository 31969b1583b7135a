"""Minimum-cost covers: the q-cost ``c_q(H)`` with a witness, a greedy upper
bound, and the q-small predicate.

A set ``T`` covers a member ``S`` when ``T`` is a subset of ``S``. Only the
inclusion-minimal members (the *targets*) need covering, and any candidate
``T`` is dominated by the intersection of all targets it covers (same or
larger coverage, cost no higher since every ``q_x < 1``). So the candidate
pool is the intersection closure of the targets, after which remaining
dominated candidates are pruned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .caps import CapExceeded, default_caps
from .measure import ProbVector, expected_hits, monomial
from .sets import SetFamily, canonical_key, minimal_elements

# float comparisons against 1/2 and between solver outputs
SLACK = 1e-12
# the DP treats two cover costs this close as equal and prefers fewer sets
TIE_EPS = 1e-14

EXACT = "exact-optimal"
UPPER = "upper-bound"


@dataclass(frozen=True)
class CoverSolution:
    cover: SetFamily
    cost: float | Fraction
    status: str
    nodes_explored: int
    method: str

    def to_dict(self):
        cost = self.cost
        out = {
            "cost": float(cost),
            "status": self.status,
            "nodes_explored": self.nodes_explored,
            "method": self.method,
            "cover": self.cover.as_sets(),
        }
        if isinstance(cost, Fraction):
            out["cost_exact"] = f"{cost.numerator}/{cost.denominator}"
        return out


@dataclass(frozen=True)
class Candidate:
    mask: int
    cov: int  # bit i set iff mask is a subset of target i
    cost: float | Fraction


def intersection_closure(targets, limit) -> list[int]:
    closure = set(targets)
    frontier = set(targets)
    while frontier:
        fresh = set()
        for a in frontier:
            for b in targets:
                c = a & b
                if c not in closure:
                    fresh.add(c)
        closure |= fresh
        if len(closure) > limit:
            raise CapExceeded(f"candidate pool exceeds {limit} sets; use greedy_cost")
        frontier = fresh
    return sorted(closure, key=canonical_key)


def coverage(mask: int, targets) -> int:
    cov = 0
    for i, t in enumerate(targets):
        if mask & ~t == 0:
            cov |= 1 << i
    return cov


def prune_dominated(cands: list[Candidate]) -> list[Candidate]:
    """Drop ``c`` when some ``d`` covers a superset at no greater cost, strictly better in one."""
    if not cands:
        return cands
    if all(isinstance(c.cost, float) for c in cands) and max(c.cov for c in cands) < 2**63:
        cov = np.array([c.cov for c in cands], dtype=np.int64)
        cost = np.array([c.cost for c in cands])
        keep = []
        for i, c in enumerate(cands):
            sup = (cov & c.cov) == c.cov
            sup[i] = False
            dom = sup & ((cost < c.cost) | ((cost == c.cost) & ((cov != c.cov) | (np.arange(cov.size) < i))))
            keep.append(not dom.any())
        return [c for c, k in zip(cands, keep) if k]
    out = []
    for i, c in enumerate(cands):
        dominated = False
        for j, d in enumerate(cands):
            if j == i or d.cov & c.cov != c.cov:
                continue
            if d.cost < c.cost or (d.cost == c.cost and (d.cov != c.cov or j < i)):
                dominated = True
                break
        if not dominated:
            out.append(c)
    return out


def candidate_pool(targets, q: ProbVector, caps=None) -> list[Candidate]:
    """Dominance-pruned candidate pool for covering ``targets``, in canonical order."""
    caps = caps or default_caps()
    masks = intersection_closure(tuple(targets), caps.pool)
    cands = [Candidate(m, coverage(m, targets), monomial(m, q)) for m in masks]
    return prune_dominated(cands)


def _trivial(family: SetFamily, q: ProbVector):
    if family.is_empty():
        zero = Fraction(0) if q.rational else 0.0
        return CoverSolution(family.with_members(()), zero, EXACT, 0, "trivial")
    if family.has_empty_set():
        one = Fraction(1) if q.rational else 1.0
        return CoverSolution(family.with_members((0,)), one, EXACT, 0, "trivial")
    return None


def _solution(family, q, masks, status, nodes, method):
    cover = family.with_members(masks)
    return CoverSolution(cover, expected_hits(cover, q), status, nodes, method)


def _dp_float(targets, cands):
    h = len(targets)
    ptr = [0]
    idx = []
    for i in range(h):
        idx.extend(k for k, c in enumerate(cands) if c.cov >> i & 1)
        ptr.append(len(idx))
    cov = np.array([c.cov for c in cands], dtype=np.int64)
    cost = np.array([c.cost for c in cands], dtype=np.float64)
    _, _, choice = kernels.cover_dp(h, cov, cost, np.array(ptr), np.array(idx), TIE_EPS)
    chosen = []
    s = (1 << h) - 1
    while s:
        c = int(choice[s])
        chosen.append(cands[c].mask)
        s &= ~int(cov[c])
    return chosen, 1 << h


def _dp_exact(targets, cands):
    """Same recurrence as the float kernel, in exact arithmetic."""
    h = len(targets)
    by_target = [[k for k, c in enumerate(cands) if c.cov >> i & 1] for i in range(h)]
    size = 1 << h
    dp = [None] * size
    cnt = [0] * size
    choice = [-1] * size
    dp[0] = Fraction(0)
    for s in range(1, size):
        low = (s & -s).bit_length() - 1
        best = None
        for c in by_target[low]:
            rest = s & ~cands[c].cov
            val = cands[c].cost + dp[rest]
            nsets = 1 + cnt[rest]
            if best is None or val < best or (val == best and nsets < cnt[s]):
                best = val
                cnt[s] = nsets
                choice[s] = c
        dp[s] = best
    chosen = []
    s = size - 1
    while s:
        c = choice[s]
        chosen.append(cands[c].mask)
        s &= ~cands[c].cov
    return chosen, size


def _greedy_masks(targets, cands):
    """Ratio greedy followed by reverse deletion of redundant picks."""
    full = (1 << len(targets)) - 1
    uncovered = full
    picked = []
    while uncovered:
        best = None
        for c in cands:
            gain = bin(c.cov & uncovered).count("1")
            if gain and (best is None or c.cost * best[1] < best[0].cost * gain):
                best = (c, gain)
        picked.append(best[0])
        uncovered &= ~best[0].cov
    for c in sorted(picked, key=lambda c: c.cost, reverse=True):
        rest = [d for d in picked if d is not c]
        union = 0
        for d in rest:
            union |= d.cov
        if union == full:
            picked = rest
    return [c.mask for c in picked], sum(c.cost for c in picked)


def _branch_and_bound(targets, cands, caps, incumbent):
    h = len(targets)
    by_target = [sorted((c for c in cands if c.cov >> i & 1), key=lambda c: c.cost) for i in range(h)]
    cheapest = [opts[0].cost for opts in by_target]
    best_masks, best_cost = incumbent
    best = [best_cost, best_masks]
    seen = {}
    nodes = 0

    def rec(uncovered, partial, chosen):
        nonlocal nodes
        nodes += 1
        if nodes > caps.bb_nodes:
            raise CapExceeded(f"branch-and-bound exceeded {caps.bb_nodes} nodes; use greedy_cost")
        if not uncovered:
            if partial < best[0]:
                best[0] = partial
                best[1] = list(chosen)
            return
        bits = [i for i in range(h) if uncovered >> i & 1]
        if partial + max(cheapest[i] for i in bits) >= best[0]:
            return
        prev = seen.get(uncovered)
        if prev is not None and prev <= partial:
            return
        seen[uncovered] = partial
        i = min(bits, key=lambda i: len(by_target[i]))
        for c in by_target[i]:
            chosen.append(c.mask)
            rec(uncovered & ~c.cov, partial + c.cost, chosen)
            chosen.pop()

    rec((1 << h) - 1, Fraction(0) if isinstance(best_cost, Fraction) else 0.0, [])
    return best[1], nodes


@lru_cache(maxsize=1 << 16)
def _solve(family: SetFamily, q: ProbVector, caps, rational: bool) -> CoverSolution:
    # ``rational`` is part of the key: 0.5 and Fraction(1, 2) hash alike
    targets = minimal_elements(family).members
    cands = candidate_pool(targets, q, caps)
    if len(targets) <= caps.dp_members:
        if rational:
            masks, nodes = _dp_exact(targets, cands)
            method = "dp-rational"
        else:
            masks, nodes = _dp_float(targets, cands)
            method = "dp"
    else:
        masks, nodes = _branch_and_bound(targets, cands, caps, _greedy_masks(targets, cands))
        method = "branch-and-bound"
    return _solution(family, q, masks, EXACT, nodes, method)


def exact_cost(family: SetFamily, q: ProbVector, caps=None) -> CoverSolution:
    """Optimal cover of ``family`` and its cost ``e_q(cover)``.

    Exact rational arithmetic is used when every entry of ``q`` is a
    ``Fraction``. Raises ``CapExceeded`` when the pool or the search budget
    is too large; ``greedy_cost`` always answers.
    """
    q.check_length(family.n)
    trivial = _trivial(family, q)
    if trivial is not None:
        return trivial
    return _solve(family.with_members(family.members), q, caps or default_caps(), q.rational)


def greedy_cost(family: SetFamily, q: ProbVector, caps=None) -> CoverSolution:
    """Valid cover whose cost upper-bounds ``c_q``."""
    caps = caps or default_caps()
    q.check_length(family.n)
    trivial = _trivial(family, q)
    if trivial is not None:
        return CoverSolution(trivial.cover, trivial.cost, UPPER, 0, "greedy")
    targets = minimal_elements(family).members
    try:
        cands = candidate_pool(targets, q, caps)
    except CapExceeded:
        cands = prune_dominated(
            [Candidate(m, coverage(m, targets), monomial(m, q)) for m in sorted({0, *targets}, key=canonical_key)]
        )
    masks, cost = _greedy_masks(targets, cands)
    options = [(cost, masks), (expected_hits(family.with_members(targets), q), list(targets))]
    options.append((Fraction(1) if q.rational else 1.0, [0]))
    cost, masks = min(options, key=lambda o: o[0])
    return _solution(family, q, masks, UPPER, len(masks), "greedy")


def is_q_small(family: SetFamily, q: ProbVector, caps=None):
    """``(c_q(H) <= 1/2, c_q(H))``; float costs get ``SLACK`` of tolerance."""
    cost = exact_cost(family, q, caps).cost
    if isinstance(cost, Fraction):
        return cost <= Fraction(1, 2), cost
    return cost <= 0.5 + SLACK, cost
