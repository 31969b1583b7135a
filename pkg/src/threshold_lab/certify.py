"""Exact-rational certificates for the fragmentation series.

Everything here is integer or ``Fraction`` arithmetic. The irrational
constants e, pi and sqrt(2) enter only through one-sided rational bounds,
always in the direction that keeps a reported total an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, isqrt

from .caps import ValidationError
from .schedule import Schedule

# e = 2.718281828459045...
E_LO = Fraction(2718281828, 10**9)
E_HI = Fraction(2718281829, 10**9)
# pi = 3.14159265358979323846...
PI_LO = Fraction(3141592653589793, 10**15)

SQRT_DIGITS = 40
ROUND_BITS = 256
HALF = Fraction(1, 2)


def sqrt_lo(x: Fraction, digits: int = SQRT_DIGITS) -> Fraction:
    """Rational lower bound on ``sqrt(x)`` with ``digits`` decimals."""
    scale = 10**digits
    return Fraction(isqrt(x.numerator * scale * scale // x.denominator), scale)


def round_up(x: Fraction, bits: int = ROUND_BITS) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


INV_SQRT_PI_HI = 1 / sqrt_lo(PI_LO)
INV_SQRT2_HI = 1 / sqrt_lo(Fraction(2))


def binom_tail_weight(ell: int, m: int, L) -> Fraction:
    """``sum_{j=m}^{ell} binom(ell, j) / L^j`` exactly."""
    L = Fraction(L)
    if not 0 <= m <= ell:
        raise ValidationError(f"need 0 <= m <= ell, got m={m}, ell={ell}")
    if L < 1:
        raise ValidationError("L must be >= 1")
    a, b = L.numerator, L.denominator
    # sum_j C(ell,j) b^j a^(ell-j) / a^ell, accumulated from j = ell downwards
    c = 1
    bj = b**ell
    apow = 1
    num = 0
    for j in range(ell, m - 1, -1):
        num += c * bj * apow
        if j > m:
            c = c * j // (ell - j + 1)
            bj //= b
            apow *= a
    return Fraction(num, a**ell)


def block_of(j: int) -> int:
    """The unique ``i`` with ``2^(i-1) <= j <= 2^i - 1``."""
    if j < 1:
        raise ValueError("j must be >= 1")
    return j.bit_length()


def inner_sum(i: int, L) -> Fraction:
    """``sum_{j=2^(i-1)}^{2^i-1} binom(2^i-1, j) / L^j`` exactly."""
    return binom_tail_weight((1 << i) - 1, 1 << (i - 1), L)


def _pow_up(r: Fraction, t: int) -> Fraction:
    """Upper bound on ``r^(2^t)`` for ``0 < r <= 1``, by squaring with upward rounding.

    Non-increasing in ``t``, which keeps successive tail bounds nested.
    """
    x = r
    for _ in range(t):
        x = round_up(x * x)
    return x


def _inv_sqrt_pi_n_hi(i: int) -> Fraction:
    """Upper bound on ``1/sqrt(pi * 2^(i-1))``; consecutive ratios never exceed ``INV_SQRT2_HI``."""
    e = i - 1
    out = INV_SQRT_PI_HI / (1 << (e // 2))
    if e % 2:
        out *= INV_SQRT2_HI
    return out


def inner_bound(i: int, L) -> Fraction:
    """Certified upper bound on ``inner_sum(i, L)`` for ``L >= 4``.

    Uses ``binom(2n-1, j) <= binom(2n-1, n) < 2^(2n-1) / sqrt(pi n)`` for
    ``j >= n = 2^(i-1)`` and sums ``L^-j`` geometrically from ``j = n``.
    """
    L = Fraction(L)
    if L < 4:
        raise ValidationError("the central-binomial bound needs L >= 4")
    k = 1 / (2 * (1 - 1 / L))
    return k * _pow_up(4 / L, i - 1) * _inv_sqrt_pi_n_hi(i)


def tail_bound(i_start: int, L) -> Fraction:
    """Certified upper bound on ``sum_{i >= i_start} inner_sum(i, L)`` for constant ``L >= 4``."""
    L = Fraction(L)
    if L < 4:
        raise ValidationError("tail bound needs L >= 4; extend i_max instead")
    if i_start < 1:
        raise ValidationError("i_start must be >= 1")
    k = 1 / (2 * (1 - 1 / L))
    return k * _pow_up(4 / L, i_start - 1) * _inv_sqrt_pi_n_hi(i_start) / (1 - INV_SQRT2_HI)


def rational_json(x: Fraction | None, max_digits: int = 200):
    """JSON form of a rational: exact when small, else a 30-digit upward decimal."""
    if x is None:
        return None
    out = {"float": float(x)}
    max_bits = int(max_digits * 3.3219)
    if x.denominator.bit_length() <= max_bits and abs(x.numerator).bit_length() <= max_bits:
        out["exact"] = f"{x.numerator}/{x.denominator}"
    else:
        out["decimal_upper"] = _decimal_up(x, 30)
    return out


def _decimal_up(x: Fraction, digits: int) -> str:
    scale = 10**digits
    v = -((-x.numerator * scale) // x.denominator)
    sign = "-" if v < 0 else ""
    v = abs(v)
    return f"{sign}{v // scale}.{v % scale:0{digits}d}"


@dataclass
class CertificateReport:
    schedule: str
    i_max: int
    exact_limit: int
    first_term: Fraction
    partial_sum: Fraction
    tail_bound: Fraction | None
    total_upper: Fraction | None
    verdict: str
    exceeds_half_at: int | None
    terms: list[dict] = field(default_factory=list)
    directions: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schedule": self.schedule,
            "i_max": self.i_max,
            "exact_limit": self.exact_limit,
            "first_term": rational_json(self.first_term),
            "partial_sum": rational_json(self.partial_sum),
            "tail_bound": rational_json(self.tail_bound),
            "total_upper": rational_json(self.total_upper),
            "verdict": self.verdict,
            "exceeds_half_at": self.exceeds_half_at,
            "terms": self.terms,
            "directions": self.directions,
        }

    def proof_log(self) -> str:
        lines = [f"schedule {self.schedule}, i_max={self.i_max}, exact up to i={self.exact_limit}"]
        lines.append(f"  i=1  2/(e L_1) <= {float(self.first_term):.15g}  (e >= {float(E_LO)})")
        for t in self.terms:
            val = "unbounded" if t["value"] is None else f"{t['value']:.15g}"
            lines.append(f"  i={t['i']:<2} L={t['L']:<5} {t['kind']:<6} {val}")
        tail = "unbounded" if self.tail_bound is None else f"<= {float(self.tail_bound):.15g}"
        lines.append(f"  tail i>{self.i_max}: {tail}")
        total = "unbounded" if self.total_upper is None else f"{float(self.total_upper):.15g}"
        lines.append(f"  total <= {total}  -> {self.verdict}")
        return "\n".join(lines)


def series_rhs(schedule: Schedule, i_max: int = 30, exact_limit: int = 14, e_lo: Fraction = E_LO) -> CertificateReport:
    """Upper bound on ``2/(e L_1) + sum_{i>=2} inner_sum(i, L_i)`` and its comparison with 1/2.

    Inner sums with ``i <= exact_limit`` are exact; beyond that they are
    replaced by ``inner_bound``, and everything past ``i_max`` by
    ``tail_bound``. Blocks with ``L_i < 4`` past the exact limit have no
    finite bound, so the total is then reported as unbounded.
    """
    if i_max < 2:
        raise ValidationError("i_max must be >= 2")
    if any(v < 1 for v in schedule.values):
        raise ValidationError("schedule has L_i < 1")
    first = 2 / (e_lo * schedule(1))
    lower_running = 2 / (E_HI * schedule(1))
    exceeds_at = None
    partial = first
    bounded = True
    terms = []
    for i in range(2, i_max + 1):
        L = schedule(i)
        if i <= exact_limit:
            value = inner_sum(i, L)
            kind = "exact"
            if exceeds_at is None:
                lower_running += value
                if lower_running > HALF:
                    exceeds_at = i
        elif L >= 4:
            value = inner_bound(i, L)
            kind = "upper"
        else:
            value = None
            kind = "upper"
            bounded = False
        terms.append({"i": i, "L": str(L), "kind": kind, "value": None if value is None else float(value)})
        if value is not None:
            partial += value
    L_tail = schedule.inf_from(i_max + 1)
    tail = tail_bound(i_max + 1, L_tail) if L_tail >= 4 else None
    total = partial + tail if bounded and tail is not None else None
    verdict = "below-half" if total is not None and total < HALF else "not-below-half"
    directions = {
        "e": f"lower bound {e_lo} (first term rounded up)",
        "pi": f"lower bound {PI_LO} (1/sqrt(pi n) rounded up)",
        "sqrt2": "1/sqrt(2) rounded up in the geometric ratio",
        "powers": f"(4/L)^n rounded up to multiples of 2^-{ROUND_BITS}",
    }
    return CertificateReport(
        schedule=schedule.describe(),
        i_max=i_max,
        exact_limit=exact_limit,
        first_term=first,
        partial_sum=partial,
        tail_bound=tail,
        total_upper=total,
        verdict=verdict,
        exceeds_half_at=exceeds_at,
        terms=terms,
        directions=directions,
    )


@dataclass(frozen=True)
class ClosedForm:
    L: Fraction
    value: Fraction
    coefficients: tuple[int, ...]
    verdict: str
    bound_checked_upto: int

    def to_dict(self):
        return {
            "L": str(self.L),
            "value": rational_json(self.value),
            "coefficients": list(self.coefficients),
            "verdict": self.verdict,
            "bound_checked_upto": self.bound_checked_upto,
        }


def closed_form(L=6, exact_terms: int = 4, check_upto: int = 64) -> ClosedForm:
    """``sum_{j<=4} coef_j / L^j + (4/L)^5 / (2 (1 - 4/L))`` with the coefficients rebuilt.

    ``coef_j = binom(2^i - 1, j)`` for the block ``i`` holding ``j``; for
    ``j > exact_terms`` the bound ``binom(2^i-1, j) <= binom(2j-1, j) <= 2^(2j-1)``
    is checked for every ``j`` up to ``check_upto``.
    """
    L = Fraction(L)
    if L <= 4:
        raise ValidationError("the closed form needs L > 4")
    coefs = tuple(comb((1 << block_of(j)) - 1, j) for j in range(1, exact_terms + 1))
    for j in range(exact_terms + 1, check_upto + 1):
        top = (1 << block_of(j)) - 1
        if not comb(top, j) <= comb(2 * j - 1, j) <= 2 ** (2 * j - 1):
            raise AssertionError(f"binomial bound fails at j={j}")
    j0 = exact_terms + 1
    value = sum((Fraction(c) / L**j for j, c in enumerate(coefs, start=1)), Fraction(0))
    value += (4 / L) ** j0 / (2 * (1 - 4 / L))
    return ClosedForm(L, value, coefs, "below-half" if value < HALF else "not-below-half", check_upto)


def closed_form_L6() -> ClosedForm:
    return closed_form(6)
