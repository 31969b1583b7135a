"""Probability and expectation thresholds for uniform measures, by bisection.

Both thresholds are sups of the set where a continuous nondecreasing map
stays at or below 1/2, so they are reported as brackets ``[lo, hi]``: the
predicate holds at ``lo`` and fails at ``hi``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .caps import CapExceeded, ValidationError, default_caps
from .cover import exact_cost
from .measure import ProbVector, prob_upset_exact, prob_upset_mc
from .sets import SetFamily, bound_ell, minimal_elements

EDGE = 1e-9


@dataclass(frozen=True)
class ThresholdResult:
    lo: float
    hi: float
    mode: str
    iterations: int
    value_at_mid: float
    unresolved: bool = False
    confidence: float | None = None

    def to_dict(self):
        return asdict(self)


def _require_nontrivial(family: SetFamily) -> SetFamily:
    h = minimal_elements(family)
    if h.is_empty():
        raise ValidationError("family is trivial: its up-closure is empty")
    if h.has_empty_set():
        raise ValidationError("family is trivial: its up-closure is all of 2^X")
    return h


def _bisect(predicate, value, tol, mode, max_iter=200):
    """Shrink ``(EDGE, 1 - EDGE)`` keeping ``predicate(lo)`` true and ``predicate(hi)`` false.

    ``predicate`` may return None to signal that it cannot decide; the
    bracket is then frozen and flagged unresolved.
    """
    if tol <= 0:
        raise ValidationError("tolerance must be > 0")
    lo, hi = EDGE, 1.0 - EDGE
    if predicate(lo) is not True or predicate(hi) is not False:
        raise ValidationError("predicate does not bracket 1/2 on (0,1); is the family trivial?")
    it = 0
    unresolved = False
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        ok = predicate(mid)
        it += 1
        if ok is None:
            unresolved = True
            break
        if ok:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, hi, mode, it, float(value(0.5 * (lo + hi))), unresolved)


def prob_threshold(
    family: SetFamily,
    tol: float = 1e-6,
    mode: str = "exact",
    trials: int = 20000,
    seed: int = 0,
    confidence: float = 0.99,
    mc_fallback: bool = False,
    caps=None,
) -> ThresholdResult:
    """Bracket ``p_c = sup {p : Pr[X_p in <F>] <= 1/2}``.

    In Monte Carlo mode every evaluation reuses the same seed, so the hit
    count is monotone in ``p`` along the bisection; a step whose Hoeffding
    interval straddles 1/2 stops the search and marks it unresolved.
    """
    caps = caps or default_caps()
    h = _require_nontrivial(family)
    n = family.n
    if mode not in ("exact", "monte-carlo"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "exact" and n > caps.exact_n:
        if not mc_fallback:
            raise CapExceeded(f"exact mode needs n <= {caps.exact_n}; enable Monte Carlo fallback")
        mode = "monte-carlo"

    if mode == "exact":
        def value(p):
            return prob_upset_exact(h, ProbVector.uniform(n, p), caps)

        return _bisect(lambda p: value(p) <= 0.5, value, tol, mode)

    def estimate(p):
        return prob_upset_mc(h, ProbVector.uniform(n, p), trials, seed, confidence)

    def decide(p):
        est = estimate(p)
        if est.hi <= 0.5:
            return True
        if est.lo > 0.5:
            return False
        return None

    res = _bisect(decide, lambda p: estimate(p).point, tol, mode)
    return ThresholdResult(res.lo, res.hi, res.mode, res.iterations, res.value_at_mid, res.unresolved, confidence)


def expectation_threshold(family: SetFamily, tol: float = 1e-6, caps=None) -> ThresholdResult:
    """Bracket ``q_c = sup {q : c_q(F) <= 1/2}``."""
    caps = caps or default_caps()
    h = _require_nontrivial(family)
    n = family.n

    def value(q):
        return float(exact_cost(h, ProbVector.uniform(n, q), caps).cost)

    return _bisect(lambda q: value(q) <= 0.5, value, tol, "exact")


def kk_bounds(ell: int) -> tuple[float, float]:
    """``(4 log2(7 ell), 4 log2(2 ell) + 7)``."""
    return 4 * math.log2(7 * ell), 4 * math.log2(2 * ell) + 7


def kk_gap_report(family: SetFamily, tol: float = 1e-6, caps=None) -> dict:
    h = _require_nontrivial(family)
    ell, _ = bound_ell(h)
    pc = prob_threshold(h, tol, caps=caps)
    qc = expectation_threshold(h, tol, caps=caps)
    ratio = pc.hi / qc.lo
    b_log7, b_4k7 = kk_bounds(ell)
    return {
        "ell": ell,
        "pc_lo": pc.lo,
        "pc_hi": pc.hi,
        "qc_lo": qc.lo,
        "qc_hi": qc.hi,
        "ratio_bound": ratio,
        "kk_bound_log7ell": b_log7,
        "kk_bound_4k7": b_4k7,
        "pass_log7ell": ratio <= b_log7,
        "pass_4k7": ratio <= b_4k7,
        "pass": ratio <= b_log7 and ratio <= b_4k7,
        "ordering_ok": qc.lo <= pc.hi + 2 * tol,
    }
