"""Fragments, the large/small split, and the k-round fragmentation process.

One run of the process starts from the minimal members ``H_0`` of ``H``,
with ``ell`` their largest size and ``k = floor(log2(2 ell))`` rounds. Round
``i`` draws ``W_i`` from the amplified vector ``1 - (1 - q)^{L_{k+1-i}}``
and keeps only the minimal fragments of size below ``m_i = 2^{k-i}``. The
run ends with either ``H_k = {}`` or ``H_k = {emptyset}``, and the second
outcome (event E) means the union ``W`` of the ``W_i`` contains a member
of ``H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

import numpy as np

from . import kernels
from .caps import CapExceeded, ValidationError, default_caps
from .certify import binom_tail_weight
from .cover import SLACK, exact_cost
from .measure import ProbVector, amplify, prob_upset_exact, sample
from .schedule import Schedule
from .sets import SetFamily, bound_ell, contains_member, minimal_elements, popcount


def fragments(family: SetFamily, w: int) -> SetFamily:
    return family.with_members(s & ~w for s in family.members)


def minimal_fragments(family: SetFamily, w: int) -> SetFamily:
    return minimal_elements(fragments(family, w))


def split_large_small(family: SetFamily, w: int, m: int):
    """``(large, small)``: minimal fragments of size ``>= m`` and ``< m``."""
    if m < 0:
        raise ValidationError("split size m must be >= 0")
    frag = minimal_fragments(family, w)
    large = [t for t in frag.members if popcount(t) >= m]
    small = [t for t in frag.members if popcount(t) < m]
    return frag.with_members(large), frag.with_members(small)


def rounds_for(ell: int) -> int:
    """``floor(log2(2 ell))`` for ``ell >= 1``."""
    return ell.bit_length()


@dataclass
class RoundRecord:
    round: int
    m: int
    schedule_index: int
    L: Fraction
    w: int
    size_before: int
    size_after: int
    large_size: int
    cost_large: float | None = None
    cost_after: float | None = None
    chain_ok: bool | None = None

    def to_dict(self):
        return {
            "round": self.round,
            "m": self.m,
            "schedule_index": self.schedule_index,
            "L": str(self.L),
            "W": _elements(self.w),
            "size_before": self.size_before,
            "size_after": self.size_after,
            "large_size": self.large_size,
            "cost_large": self.cost_large,
            "cost_after": self.cost_after,
            "chain_ok": self.chain_ok,
        }


def _elements(mask):
    return [x for x in range(mask.bit_length()) if mask >> x & 1]


@dataclass
class ProcessTrace:
    k: int
    ell: int
    rounds: list[RoundRecord] = field(default_factory=list)
    w: int = 0
    event_e: bool = False
    member_hit: bool = False
    cost_h: float | None = None
    z: float | None = None
    costs_available: bool = False
    bounded_ok: bool = True

    def to_dict(self):
        return {
            "k": self.k,
            "ell": self.ell,
            "rounds": [r.to_dict() for r in self.rounds],
            "W": _elements(self.w),
            "event_E": self.event_e,
            "member_hit": self.member_hit,
            "cost_H": self.cost_h,
            "Z": self.z,
            "costs_available": self.costs_available,
            "bounded_ok": self.bounded_ok,
        }

    def violations(self) -> list[str]:
        """Invariants every trace must satisfy; an empty list means none broken."""
        out = []
        if not self.bounded_ok:
            out.append("H_i not (2^(k-i)-1)-bounded")
        if self.event_e and not self.member_hit:
            out.append("E without W in <H>")
        if self.costs_available:
            if self.z < self.cost_h - SLACK and not self.event_e:
                out.append("Z < c_q(H) without E")
            if any(r.chain_ok is False for r in self.rounds):
                out.append("cost chain broken")
        return out


def _require_process_input(family: SetFamily):
    if family.is_empty():
        raise ValidationError("the process needs a nonempty family")
    if family.has_empty_set():
        raise ValidationError("the process needs a family without the empty set")


def run_process(
    family: SetFamily,
    q: ProbVector,
    schedule: Schedule,
    rng: np.random.Generator,
    compute_costs: bool = False,
    caps=None,
) -> ProcessTrace:
    caps = caps or default_caps()
    _require_process_input(family)
    q.check_length(family.n)
    h0 = minimal_elements(family)
    ell, _ = bound_ell(h0)
    k = rounds_for(ell)
    trace = ProcessTrace(k=k, ell=ell)

    costs = compute_costs
    if costs:
        try:
            trace.cost_h = float(exact_cost(h0, q, caps).cost)
        except CapExceeded:
            costs = False

    current = h0
    prev_cost = trace.cost_h
    z = 0.0
    amplified = {}
    for i in range(1, k + 1):
        m = 1 << (k - i)
        j = k + 1 - i
        L = schedule(j)
        if L not in amplified:
            amplified[L] = amplify(q, L)
        w = sample(amplified[L], rng)
        large, small = split_large_small(current, w, m)
        rec = RoundRecord(i, m, j, L, w, len(current), len(small), len(large))
        if costs:
            try:
                rec.cost_large = float(exact_cost(large, q, caps).cost)
                rec.cost_after = float(exact_cost(small, q, caps).cost)
            except CapExceeded:
                costs = False
            else:
                z += rec.cost_large
                rec.chain_ok = rec.cost_after >= prev_cost - rec.cost_large - SLACK
                prev_cost = rec.cost_after
        if small.members and popcount(small.members[-1]) > m - 1:
            trace.bounded_ok = False
        trace.rounds.append(rec)
        trace.w |= w
        current = small

    trace.event_e = current.members == (0,)
    trace.member_hit = contains_member(h0, trace.w)
    trace.costs_available = costs
    if costs:
        trace.z = z
    else:
        for rec in trace.rounds:
            rec.cost_large = rec.cost_after = rec.chain_ok = None
    return trace


# ------------------------------------------------------------ lemma checks


@dataclass(frozen=True)
class LemmaCheck:
    lemma: int
    lhs: float
    rhs: float
    verdict: bool
    details: dict

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self):
        return {"lemma": self.lemma, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "verdict": self.verdict, **self.details}


def expected_large_cost(family: SetFamily, q: ProbVector, p: ProbVector, m: int, caps=None) -> float:
    """``E[c_q(L_m(H, X_p))]`` by enumerating every outcome of ``X_p``."""
    caps = caps or default_caps()
    if family.n > caps.exact_n:
        raise CapExceeded(f"enumerating 2^{family.n} outcomes exceeds exact_n={caps.exact_n}")
    weights = kernels.outcome_weights(p.as_array())
    h0 = minimal_elements(family)
    memo = {}
    total = 0.0
    for w in range(1 << family.n):
        large = [t for t in minimal_fragments(h0, w).members if popcount(t) >= m]
        key = tuple(large)
        if key not in memo:
            memo[key] = float(exact_cost(h0.with_members(large), q, caps).cost) if large else 0.0
        total += float(weights[w]) * memo[key]
    return total


def verify_lemma1(family: SetFamily, q: ProbVector, L: Real, m: int, ell: int | None = None, caps=None) -> LemmaCheck:
    """Check ``E[c_q(L_m(H, X_p))] <= Pr[X_p in <H>] * sum_{j=m}^{ell} binom(ell, j) / L^j``."""
    caps = caps or default_caps()
    q.check_length(family.n)
    if m < 1:
        raise ValidationError("Lemma 1 needs m >= 1")
    h_ell, _ = bound_ell(minimal_elements(family))
    ell = h_ell if ell is None else ell
    if ell < h_ell:
        raise ValidationError(f"family is not {ell}-bounded")
    p = amplify(q, L)
    lhs = expected_large_cost(family, q, p, m, caps)
    prob = prob_upset_exact(family, p, caps)
    weight = binom_tail_weight(ell, m, Fraction(L)) if m <= ell else Fraction(0)
    rhs = prob * float(weight)
    details = {"ell": ell, "m": m, "L": str(Fraction(L)), "prob_upset": prob, "tail_weight": float(weight)}
    return LemmaCheck(1, lhs, rhs, lhs <= rhs + SLACK, details)


def verify_lemma2(family: SetFamily, q: ProbVector, L: Real, enumerate_check: bool = False, caps=None) -> LemmaCheck:
    """Check ``c_q(H) * prod_i (1 - q_{h_i})^L <= 1/(e L)`` for 1-bounded ``H``.

    With ``enumerate_check`` the left side is also recomputed by full outcome
    enumeration and reported as ``lhs_enumerated``.
    """
    q.check_length(family.n)
    _require_process_input(family)
    h0 = minimal_elements(family)
    if bound_ell(h0)[0] != 1:
        raise ValidationError("Lemma 2 needs a 1-bounded family")
    if L < 1:
        raise ValidationError("Lemma 2 needs L >= 1")
    Lf = float(L)
    cost = float(exact_cost(h0, q, caps).cost)
    miss = 1.0
    for s in h0.members:
        x = s.bit_length() - 1
        miss *= (1.0 - float(q[x])) ** Lf
    lhs = cost * miss
    bound = 1.0 / (math.e * Lf)
    details = {"L": str(Fraction(L)), "r": len(h0), "cost": cost}
    if enumerate_check:
        details["lhs_enumerated"] = expected_large_cost(h0, q, amplify(q, L), 1, caps)
    return LemmaCheck(2, lhs, bound, lhs <= bound + SLACK, details)
