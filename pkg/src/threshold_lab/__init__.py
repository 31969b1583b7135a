"""Executable objects of the expectation-threshold (Kahn-Kalai) proof by fragments."""

__version__ = "0.1.0"

from .caps import CapExceeded, Caps, ValidationError
from .certify import binom_tail_weight, closed_form_L6, series_rhs, tail_bound
from .cover import CoverSolution, exact_cost, greedy_cost, is_q_small
from .families import gen_random_family, gen_subgraph_family
from .fragmentation import (
    ProcessTrace,
    fragments,
    minimal_fragments,
    run_process,
    split_large_small,
    verify_lemma1,
    verify_lemma2,
)
from .measure import (
    ProbEstimate,
    ProbVector,
    amplify,
    expected_hits,
    prob_upset_exact,
    prob_upset_mc,
    sample,
    substream,
)
from .schedule import Schedule
from .sets import (
    GroundSet,
    SetFamily,
    bound_ell,
    contains_member,
    minimal_elements,
    parse_family,
    serialize_family,
)
from .thresholds import ThresholdResult, expectation_threshold, kk_gap_report, prob_threshold

__all__ = [
    "CapExceeded",
    "Caps",
    "CoverSolution",
    "GroundSet",
    "ProbEstimate",
    "ProbVector",
    "ProcessTrace",
    "Schedule",
    "SetFamily",
    "ThresholdResult",
    "ValidationError",
    "amplify",
    "binom_tail_weight",
    "bound_ell",
    "closed_form_L6",
    "contains_member",
    "exact_cost",
    "expectation_threshold",
    "expected_hits",
    "fragments",
    "gen_random_family",
    "gen_subgraph_family",
    "greedy_cost",
    "is_q_small",
    "kk_gap_report",
    "minimal_elements",
    "minimal_fragments",
    "parse_family",
    "prob_threshold",
    "prob_upset_exact",
    "prob_upset_mc",
    "run_process",
    "sample",
    "serialize_family",
    "series_rhs",
    "split_large_small",
    "substream",
    "tail_bound",
    "verify_lemma1",
    "verify_lemma2",
]
