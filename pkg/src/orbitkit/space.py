"""Exact arithmetic on closed subsets of the unit interval.

Everything here is built on rational numbers (``fractions.Fraction``), so
set operations, the Hausdorff distance and the weighted sequence metric
are computed exactly.  Floating point only ever appears when a value is
formatted for a report.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Q = Fraction

ZERO = Q(0)
ONE = Q(1)

# A union of more than this many components is coarsened to grid cells.
COMPONENT_BUDGET = 4096
COARSE_GRID = 4096

RationalLike = Union[Fraction, int, str]


class SpaceError(ValueError):
    """Base class for errors raised by exact set arithmetic."""


class EmptyInput(SpaceError):
    """A construction that requires at least one part got none."""


class OutOfRange(SpaceError):
    """An endpoint fell outside the unit interval."""


class LengthMismatch(SpaceError):
    """A sequence prefix is shorter than the requested index range."""


def as_q(value: RationalLike) -> Q:
    """Convert ints, ``p/q`` strings or decimal strings to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Q(value)
    if isinstance(value, str):
        return Q(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def q_str(value: Q) -> str:
    """Canonical ``p/q`` (or integer) text for a rational."""
    return str(value)


@dataclass(frozen=True)
class ClosedSet:
    """Canonical finite union of closed intervals (points are degenerate).

    Invariants: components are sorted, pairwise disjoint with positive
    gaps, and contained in [0, 1].  Equal point sets always have equal
    representations, so instances hash and compare structurally; that is
    what makes cycle detection by hashing possible.

    ``outer`` marks a set that was coarsened to the 1/4096 grid after
    exceeding the component budget; it is a sound superset of the true
    set.  The flag does not take part in equality.
    """

    components: tuple[tuple[Q, Q], ...]
    outer: bool = field(default=False, compare=False)
    _los: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        if not self.components:
            raise EmptyInput("a ClosedSet has at least one component")
        prev_hi: Optional[Q] = None
        for lo, hi in self.components:
            if lo > hi:
                raise SpaceError(f"component [{lo}, {hi}] is inverted")
            if lo < ZERO or hi > ONE:
                raise OutOfRange(f"component [{lo}, {hi}] leaves [0, 1]")
            if prev_hi is not None and lo <= prev_hi:
                raise SpaceError("components must be separated by gaps")
            prev_hi = hi
        object.__setattr__(self, "_los",
                           tuple(lo for lo, _ in self.components))

    # -- basic queries -------------------------------------------------

    @property
    def min(self) -> Q:
        return self.components[0][0]

    @property
    def max(self) -> Q:
        return self.components[-1][1]

    def contains(self, x: Q) -> bool:
        i = bisect.bisect_right(self._los, x) - 1
        return i >= 0 and self.components[i][1] >= x

    def is_finite(self) -> bool:
        """True when every component is a single point."""
        return all(lo == hi for lo, hi in self.components)

    def points(self) -> tuple[Q, ...]:
        """The members of a finite set; raises if a component is fat."""
        if not self.is_finite():
            raise SpaceError("set has interval components")
        return tuple(lo for lo, _ in self.components)

    def subset_of(self, other: "ClosedSet") -> bool:
        return all(
            any(olo <= lo and hi <= ohi for olo, ohi in other.components)
            for lo, hi in self.components
        )

    def dist_to(self, x: Q) -> Q:
        """Distance from the point x to this set.

        Only the nearest component on each side of x can attain it.
        """
        i = bisect.bisect_right(self._los, x) - 1
        best: Optional[Q] = None
        for j in (i, i + 1):
            if 0 <= j < len(self.components):
                lo, hi = self.components[j]
                d = max(lo - x, x - hi, ZERO)
                if best is None or d < best:
                    best = d
        assert best is not None
        return best

    def meets_open(self, lo: Q, hi: Q) -> bool:
        """Does the set meet the open interval (lo, hi)?"""
        if lo >= hi:
            return False
        for clo, chi in self.components:
            if clo == chi:
                if lo < clo < hi:
                    return True
            elif clo < hi and chi > lo:
                return True
        return False

    def __str__(self) -> str:
        return format_set(self)


def point(x: RationalLike) -> ClosedSet:
    q = as_q(x)
    return ClosedSet(((q, q),))


def interval(lo: RationalLike, hi: RationalLike) -> ClosedSet:
    return ClosedSet(((as_q(lo), as_q(hi)),))


FULL = interval(0, 1)


def _merge(parts: list[tuple[Q, Q]], outer: bool) -> ClosedSet:
    parts.sort()
    merged: list[tuple[Q, Q]] = []
    for lo, hi in parts:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    if len(merged) > COMPONENT_BUDGET:
        coarse = [
            (Q(math.floor(lo * COARSE_GRID), COARSE_GRID),
             Q(math.ceil(hi * COARSE_GRID), COARSE_GRID))
            for lo, hi in merged
        ]
        return _merge(coarse, True)
    return ClosedSet(tuple(merged), outer=outer)


def canonicalize(parts: Iterable) -> ClosedSet:
    """Build the canonical closed set equal to the union of the parts.

    Parts may be rationals (points), (lo, hi) pairs, or ClosedSets.
    Touching or overlapping parts are merged; order is irrelevant.
    """
    raw: list[tuple[Q, Q]] = []
    outer = False
    for part in parts:
        if isinstance(part, ClosedSet):
            raw.extend(part.components)
            outer = outer or part.outer
        elif isinstance(part, tuple):
            lo, hi = as_q(part[0]), as_q(part[1])
            raw.append((lo, hi))
        else:
            q = as_q(part)
            raw.append((q, q))
    if not raw:
        raise EmptyInput("no parts to canonicalize")
    for lo, hi in raw:
        if lo > hi:
            raise SpaceError(f"interval [{lo}, {hi}] is inverted")
        if lo < ZERO or hi > ONE:
            raise OutOfRange(f"endpoint of [{lo}, {hi}] leaves [0, 1]")
    return _merge(raw, outer)


def union(a: ClosedSet, b: ClosedSet) -> ClosedSet:
    return _merge(list(a.components) + list(b.components), a.outer or b.outer)


def intersection(a: ClosedSet, b: ClosedSet) -> Optional[ClosedSet]:
    """Intersection, or None when empty (emptiness is a signal, not an error)."""
    parts: list[tuple[Q, Q]] = []
    for alo, ahi in a.components:
        for blo, bhi in b.components:
            lo, hi = max(alo, blo), min(ahi, bhi)
            if lo <= hi:
                parts.append((lo, hi))
    if not parts:
        return None
    return _merge(parts, a.outer or b.outer)


def combine(kind: str, a: ClosedSet, b: ClosedSet) -> Optional[ClosedSet]:
    """Dispatch union/intersection by name (the report vocabulary)."""
    if kind == "union":
        return union(a, b)
    if kind == "intersection":
        return intersection(a, b)
    raise ValueError(f"unknown combine kind {kind!r}")


def directed_excess(a: ClosedSet, b: ClosedSet) -> Q:
    """sup over a in A of dist(a, B), computed exactly.

    The supremum of the piecewise linear map x -> dist(x, B) over A is
    attained at a component endpoint of A or at a gap midpoint of B
    lying inside A, so an endpoint sweep is exact.
    """
    candidates: list[Q] = []
    for lo, hi in a.components:
        candidates.append(lo)
        candidates.append(hi)
    for (llo, lhi), (rlo, rhi) in zip(b.components, b.components[1:]):
        mid = (lhi + rlo) / 2
        if a.contains(mid):
            candidates.append(mid)
    return max(b.dist_to(c) for c in candidates)


def hausdorff(a: ClosedSet, b: ClosedSet) -> Q:
    """Exact Hausdorff distance between two canonical closed sets."""
    return max(directed_excess(a, b), directed_excess(b, a))


def maxdist(a: ClosedSet, b: ClosedSet) -> Q:
    """max over (a, b) in A x B of |a - b|; attained at extreme endpoints."""
    return max(a.max - b.min, b.max - a.min, ZERO)


# -- sequence prefixes and the weighted metric on sequence space -------

SeqPrefix = tuple[Q, ...]


def as_prefix(entries: Sequence[RationalLike]) -> SeqPrefix:
    vals = tuple(as_q(e) for e in entries)
    if not vals:
        raise EmptyInput("a prefix has at least one entry")
    for v in vals:
        if v < ZERO or v > ONE:
            raise OutOfRange(f"prefix entry {v} leaves [0, 1]")
    return vals


def rho_prefix(u: Sequence[Q], v: Sequence[Q], n: int) -> tuple[Q, Q]:
    """Partial sum of the weighted sequence metric plus its tail bound.

    Returns (value, tail) with value = sum_{i=1..n} |u_i - v_i| / 2^i and
    tail = 2^-n.  Because point distances never exceed 1, the metric
    between any infinite extensions of u and v lies in [value, value+tail].
    """
    if len(u) < n or len(v) < n:
        raise LengthMismatch(f"prefixes shorter than n={n}")
    value = ZERO
    for i in range(n):
        value += abs(u[i] - v[i]) / Q(2) ** (i + 1)
    return value, Q(1, 2**n)


# -- text literals ------------------------------------------------------


def parse_set(text: str) -> ClosedSet:
    """Parse a set literal: terms joined by '|', each '[a,b]' or '{p}'.

    Rationals may be written as p/q or in decimal form; both convert
    exactly.
    """
    parts: list = []
    for raw in text.split("|"):
        term = raw.strip()
        if not term:
            raise SpaceError(f"empty term in set literal {text!r}")
        if term.startswith("[") and term.endswith("]"):
            inner = term[1:-1].split(",")
            if len(inner) != 2:
                raise SpaceError(f"interval term {term!r} needs two endpoints")
            parts.append((as_q(inner[0]), as_q(inner[1])))
        elif term.startswith("{") and term.endswith("}"):
            parts.append(as_q(term[1:-1]))
        else:
            raise SpaceError(f"unrecognized set term {term!r}")
    return canonicalize(parts)


def format_set(s: ClosedSet) -> str:
    terms = []
    for lo, hi in s.components:
        terms.append("{%s}" % lo if lo == hi else "[%s,%s]" % (lo, hi))
    return "|".join(terms)


# -- grid helpers (epsilon-cells shared by covers and transition graphs)


def grid_size(eps: Q) -> int:
    """Validate eps = 1/m with integer m >= 2 and return m."""
    if eps <= 0 or eps.numerator != 1 or eps.denominator < 2:
        raise SpaceError(f"grid resolution must be 1/m with m >= 2, got {eps}")
    return eps.denominator


def cell_interval(index: int, m: int) -> ClosedSet:
    return interval(Q(index, m), Q(index + 1, m))


def cells_meeting(s: ClosedSet, m: int) -> tuple[int, ...]:
    """Indices of the closed grid cells [i/m, (i+1)/m] meeting the set.

    Cell i meets [lo, hi] exactly when lo*m - 1 <= i <= hi*m; cells that
    touch a component only at a shared endpoint count as meeting it.
    """
    hit: set[int] = set()
    for lo, hi in s.components:
        first = max(0, math.ceil(lo * m - 1))
        last = min(m - 1, math.floor(hi * m))
        hit.update(range(first, last + 1))
    return tuple(sorted(hit))
