"""Enumeration caps and the two error classes every module raises."""

import os
from dataclasses import dataclass, fields, replace

CAPS_ENV = "THRESHOLD_LAB_CAPS"


class ValidationError(ValueError):
    """Malformed input: bad file, out-of-range element, probability outside (0,1)."""


class CapExceeded(RuntimeError):
    """An exact computation would exceed a configured size cap."""


@dataclass(frozen=True)
class Caps:
    exact_n: int = 22  # outcome enumeration over 2^n
    dp_members: int = 20  # subset-DP path of the cover solver
    bb_nodes: int = 2_000_000  # branch-and-bound node budget
    pool: int = 200_000  # candidate pool size for cover solving
    max_n: int = 63  # bitmask width

    @classmethod
    def from_env(cls, text=None):
        """Parse ``key=value,key=value`` overrides, e.g. ``exact_n=24,dp_members=18``."""
        text = os.environ.get(CAPS_ENV, "") if text is None else text
        caps = cls()
        names = {f.name for f in fields(cls)}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in names:
                raise ValidationError(f"bad {CAPS_ENV} entry {item!r}")
            try:
                caps = replace(caps, **{key: int(value)})
            except ValueError:
                raise ValidationError(f"bad {CAPS_ENV} value {item!r}") from None
        if not 1 <= caps.max_n <= 63:
            raise ValidationError("max_n must lie in [1, 63]")
        return caps


def default_caps():
    return Caps.from_env()
