"""The product measure: sampling, exact up-set probabilities, expected hits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from . import kernels
from .caps import CapExceeded, ValidationError, default_caps
from .sets import SetFamily, minimal_elements

# Stream-splitting rule: every random draw in the package comes from
#   Generator(Philox(SeedSequence(seed, spawn_key=(namespace, index))))
# so a trial or block is addressable by index alone and serial and threaded
# runs agree for the same seed.
STREAM_MC = 1
STREAM_PROCESS = 2
STREAM_FAMILY = 3
STREAM_SAMPLE = 4

MC_BLOCK = 8192


def substream(seed: int, *key: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ProbVector:
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise ValidationError("probability vector is empty")
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, Real):
                raise ValidationError(f"probability {v!r} is not a number")
            if not 0 < v < 1:
                raise ValidationError(f"probabilities must lie in the open interval (0,1), got {v}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, n: int, p) -> ProbVector:
        return cls((p,) * n)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def rational(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values)

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=np.float64)

    def check_length(self, n: int) -> ProbVector:
        if len(self.values) != n:
            raise ValidationError(f"probability vector has length {len(self.values)}, ground set has {n}")
        return self


@dataclass(frozen=True)
class ProbEstimate:
    point: float
    lo: float
    hi: float
    trials: int
    hits: int
    seed: int
    confidence: float

    def to_dict(self):
        return {
            "point": self.point,
            "lo": self.lo,
            "hi": self.hi,
            "trials": self.trials,
            "hits": self.hits,
            "seed": self.seed,
            "confidence": self.confidence,
        }


def amplify(q: ProbVector, L) -> ProbVector:
    """Per-element law of the union of ``L`` independent samples of ``q``."""
    if L < 1:
        raise ValidationError(f"amplification exponent must be >= 1, got {L}")
    if q.rational and isinstance(L, (int, Fraction)) and Fraction(L).denominator == 1:
        k = int(L)
        return ProbVector(tuple(1 - (1 - Fraction(v)) ** k for v in q.values))
    Lf = float(L)
    out = []
    for v in q.values:
        # expm1/log1p keep 1-(1-q)^L accurate for tiny q
        pv = -math.expm1(Lf * math.log1p(-float(v)))
        out.append(min(pv, math.nextafter(1.0, 0.0)))
    return ProbVector(tuple(out))


def sample(q: ProbVector, rng: np.random.Generator) -> int:
    """One draw of ``X_q``: each element kept independently with its probability."""
    u = rng.random((1, len(q)))
    return int(kernels.pack_masks(u, q.as_array())[0])


def sample_many(q: ProbVector, rng: np.random.Generator, count: int) -> np.ndarray:
    return kernels.pack_masks(rng.random((count, len(q))), q.as_array())


def monomial(mask: int, q: ProbVector):
    """``prod_{x in mask} q_x``; exact when ``q`` is rational."""
    out = Fraction(1) if q.rational else 1.0
    x = 0
    while mask:
        if mask & 1:
            out *= q.values[x]
        mask >>= 1
        x += 1
    return out


def expected_hits(family: SetFamily, q: ProbVector):
    """Sum of the monomials ``q^S`` over the members of ``family``."""
    q.check_length(family.n)
    total = Fraction(0) if q.rational else 0.0
    for m in family.members:
        total += monomial(m, q)
    return total


def prob_upset_exact(family: SetFamily, p: ProbVector, caps=None) -> float:
    """Probability that ``X_p`` lands in the up-closure, by full enumeration of ``2^X``."""
    caps = caps or default_caps()
    p.check_length(family.n)
    if family.n > caps.exact_n:
        raise CapExceeded(
            f"exact enumeration needs n <= {caps.exact_n} (got n={family.n}); "
            "use Monte Carlo mode (prob_upset_mc) or raise exact_n"
        )
    members = minimal_elements(family).members
    if not members:
        return 0.0
    return kernels.prob_upset(np.array(members, dtype=np.int64), p.as_array())


def hoeffding_halfwidth(trials: int, confidence: float) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * trials))


def bernoulli_estimate(hits, trials, seed, confidence) -> ProbEstimate:
    point = hits / trials
    half = hoeffding_halfwidth(trials, confidence)
    return ProbEstimate(point, max(0.0, point - half), min(1.0, point + half), trials, hits, seed, confidence)


def _block_hits(members, p, seed, block, size):
    rng = substream(seed, STREAM_MC, block)
    samples = kernels.pack_masks(rng.random((size, p.size)), p)
    return int(kernels.upset_hits(samples, members).sum())


def prob_upset_mc(
    family: SetFamily,
    p: ProbVector,
    trials: int,
    seed: int,
    confidence: float = 0.99,
    threads: int = 1,
) -> ProbEstimate:
    """Monte Carlo estimate with a two-sided Hoeffding interval.

    Trial ``t`` lives in block ``t // MC_BLOCK`` of the ``STREAM_MC`` namespace,
    so the estimate does not depend on ``threads``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if not 0 < confidence < 1:
        raise ValidationError("confidence must lie in (0,1)")
    p.check_length(family.n)
    members = np.array(minimal_elements(family).members, dtype=np.int64)
    parr = p.as_array()
    blocks = [(b, min(MC_BLOCK, trials - b * MC_BLOCK)) for b in range(-(-trials // MC_BLOCK))]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(lambda bs: _block_hits(members, parr, seed, *bs), blocks))
    else:
        counts = [_block_hits(members, parr, seed, b, s) for b, s in blocks]
    return bernoulli_estimate(sum(counts), trials, seed, confidence)
