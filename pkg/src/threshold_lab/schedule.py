"""Amplification schedules ``L_1, L_2, ...``.

Descriptors: ``paper`` (5 for i <= 7, then 4), ``const:<L>`` and
``custom:<L1>,<L2>,...`` (the last value repeats). Values are parsed as
exact rationals, so ``const:4.5`` is 9/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .caps import ValidationError


def _rational(text) -> Fraction:
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {text!r}") from None
    return value


@dataclass(frozen=True)
class Schedule:
    kind: str
    values: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind not in ("paper", "constant", "custom"):
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        vals = tuple(Fraction(v) for v in self.values)
        if self.kind == "paper":
            vals = (Fraction(5), Fraction(4))
        if not vals or (self.kind == "constant" and len(vals) != 1):
            raise ValidationError("schedule needs at least one value")
        if any(v < 1 for v in vals):
            raise ValidationError("every schedule value L_i must be >= 1")
        object.__setattr__(self, "values", vals)

    @classmethod
    def paper(cls) -> Schedule:
        return cls("paper")

    @classmethod
    def constant(cls, L) -> Schedule:
        return cls("constant", (Fraction(L),))

    @classmethod
    def custom(cls, values) -> Schedule:
        return cls("custom", tuple(values))

    @classmethod
    def parse(cls, text: str) -> Schedule:
        text = text.strip()
        if text == "paper":
            return cls.paper()
        kind, _, rest = text.partition(":")
        if kind in ("const", "constant") and rest:
            return cls.constant(_rational(rest))
        if kind == "custom" and rest:
            return cls.custom(_rational(v) for v in rest.split(","))
        raise ValidationError(f"bad schedule {text!r}; expected paper, const:L or custom:L1,L2,...")

    def __call__(self, i: int) -> Fraction:
        """``L_i`` for ``i >= 1``."""
        if i < 1:
            raise ValueError("schedule index starts at 1")
        if self.kind == "paper":
            return self.values[0] if i <= 7 else self.values[1]
        if self.kind == "constant":
            return self.values[0]
        return self.values[min(i, len(self.values)) - 1]

    def inf_from(self, i: int) -> Fraction:
        """``min_{j >= i} L_j``; every kind is eventually constant."""
        if self.kind == "paper":
            return min(self(j) for j in range(i, max(i, 8) + 1))
        if self.kind == "constant":
            return self.values[0]
        return min(self.values[min(i, len(self.values)) - 1:])

    def total(self, k: int) -> Fraction:
        """``L_1 + ... + L_k``, the exponent of the union of all rounds."""
        return sum((self(i) for i in range(1, k + 1)), Fraction(0))

    def describe(self) -> str:
        if self.kind == "paper":
            return "paper"
        if self.kind == "constant":
            return f"const:{self.values[0]}"
        return "custom:" + ",".join(str(v) for v in self.values)
