"""Ground sets, subset bitmasks and set families.

A subset of the ground set ``{0, ..., n-1}`` is a plain ``int`` whose bit
``x`` marks membership of element ``x``. Families are immutable, deduplicated
and kept in canonical order: by popcount, then by numeric mask value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .caps import ValidationError

MAX_N = 63


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(elements) -> int:
    m = 0
    for x in elements:
        m |= 1 << int(x)
    return m


def elements_of(mask: int) -> list[int]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return out


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def canonical_key(mask: int):
    return (popcount(mask), mask)


@dataclass(frozen=True)
class GroundSet:
    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or not 1 <= self.n <= MAX_N:
            raise ValidationError(f"ground-set size must lie in [1, {MAX_N}], got {self.n!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.n or len(set(labels)) != self.n:
                raise ValidationError("labels must be n distinct strings")
            object.__setattr__(self, "labels", labels)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def check(self, mask: int) -> int:
        if mask < 0 or mask >> self.n:
            raise ValidationError(f"subset {elements_of(mask)} has elements outside [0, {self.n})")
        return mask


@dataclass(frozen=True)
class SetFamily:
    """Deduplicated, canonically ordered collection of subsets of a ground set."""

    ground: GroundSet
    members: tuple[int, ...] = ()
    q: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        for m in self.members:
            self.ground.check(m)
        object.__setattr__(self, "members", tuple(sorted(set(self.members), key=canonical_key)))

    @classmethod
    def from_sets(cls, n, sets, labels=None, q=None):
        return cls(GroundSet(n, labels), tuple(mask_of(s) for s in sets), q)

    @property
    def n(self) -> int:
        return self.ground.n

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def with_members(self, members) -> SetFamily:
        return SetFamily(self.ground, tuple(members), self.q)

    def as_sets(self) -> list[list[int]]:
        return [elements_of(m) for m in self.members]

    def is_empty(self) -> bool:
        return not self.members

    def has_empty_set(self) -> bool:
        return bool(self.members) and self.members[0] == 0

    def is_antichain(self) -> bool:
        return len(minimal_elements(self)) == len(self)


def minimal_elements(family: SetFamily) -> SetFamily:
    """Inclusion-minimal members. Canonical order doubles as the size prefilter."""
    if len(family) <= 1:
        return family
    keep = kernels.minimal_keep(np.array(family.members, dtype=np.int64))
    return family.with_members(m for m, k in zip(family.members, keep) if k)


def contains_member(family: SetFamily, s: int) -> bool:
    """True iff ``s`` lies in the up-closure of ``family``."""
    return any(m & ~s == 0 for m in family.members)


def bound_ell(family: SetFamily) -> tuple[int, bool]:
    """Largest member size, plus a flag that is True for the empty family."""
    if not family.members:
        return 0, True
    return popcount(family.members[-1]), False


# ------------------------------------------------------------ serialization


def parse_family(source) -> SetFamily:
    """Read the JSON family format from bytes, str, or a binary/text stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"family file is not UTF-8: {exc}") from None
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed family file: {exc}") from None
    return family_from_dict(doc)


def family_from_dict(doc) -> SetFamily:
    if not isinstance(doc, dict) or "n" not in doc or "sets" not in doc:
        raise ValidationError('family file must be an object with keys "n" and "sets"')
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError('"n" must be an integer')
    ground = GroundSet(n, doc.get("labels"))
    sets = doc["sets"]
    if not isinstance(sets, list):
        raise ValidationError('"sets" must be an array of arrays')
    members = []
    for s in sets:
        if not isinstance(s, list):
            raise ValidationError('"sets" must be an array of arrays')
        for x in s:
            if isinstance(x, bool) or not isinstance(x, int):
                raise ValidationError(f"element {x!r} is not an integer index")
            if not 0 <= x < n:
                raise ValidationError(f"element {x} out of range for n={n}")
        members.append(mask_of(s))
    q = doc.get("q")
    if q is not None:
        if not isinstance(q, list) or len(q) != n:
            raise ValidationError('"q" must be an array of n numbers')
        for v in q:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
                raise ValidationError(f'"q" entries must lie in (0,1), got {v!r}')
        q = tuple(float(v) for v in q)
    return SetFamily(ground, tuple(members), q)


def family_to_dict(family: SetFamily) -> dict:
    doc = {"n": family.n, "sets": family.as_sets()}
    if family.ground.labels is not None:
        doc["labels"] = list(family.ground.labels)
    if family.q is not None:
        doc["q"] = list(family.q)
    return doc


def serialize_family(family: SetFamily) -> str:
    return json.dumps(family_to_dict(family))
