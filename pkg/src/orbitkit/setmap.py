"""Piecewise representations of multivalued maps on [0, 1].

A map is a finite list of graph pieces whose union is the graph of F.
Piece domains carry open/closed end flags so that maps with non-closed
graphs are representable; closedness of the graph (and hence upper
semicontinuity on the compact interval) is then decidable symbolically
from one-sided limit sets at the finitely many breakpoints.

Images of open or half-open slivers are returned as their closures: the
codomain is the lattice of closed sets, so this is exact for every map
whose piece domains are closed and a sound closure otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .space import (
    ClosedSet,
    ONE,
    Q,
    ZERO,
    as_q,
    canonicalize,
    interval,
    point,
)


class MapError(ValueError):
    """Base class for map construction and evaluation errors."""


class DomainGap(MapError):
    """No piece applies at the queried point."""


class NotOnto(MapError):
    """A map required to be onto [0, 1] is not."""


FLAG_TEXT = {"cc": (True, True), "co": (True, False),
             "oc": (False, True), "oo": (False, False)}


def _flags(closed_lo: bool, closed_hi: bool) -> str:
    return ("c" if closed_lo else "o") + ("c" if closed_hi else "o")


@dataclass(frozen=True)
class _Domain:
    lo: Q
    hi: Q
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise MapError(f"domain [{self.lo}, {self.hi}] is inverted")
        if self.lo < ZERO or self.hi > ONE:
            raise MapError("piece domain leaves [0, 1]")
        if self.lo == self.hi and not (self.closed_lo and self.closed_hi):
            raise MapError("a degenerate domain must be closed")

    def applies(self, x: Q) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.closed_lo:
            return False
        if x == self.hi and not self.closed_hi:
            return False
        return True

    def accumulates_left(self, x: Q) -> bool:
        """Does the domain contain points arbitrarily close to x from below?"""
        return self.lo < x <= self.hi

    def accumulates_right(self, x: Q) -> bool:
        return self.lo <= x < self.hi

    def clip_closed(self, lo: Q, hi: Q) -> Optional[tuple[Q, Q]]:
        """Closure of the overlap with [lo, hi], or None when exactly empty.

        Emptiness respects the end flags: a half-open domain does not
        meet an interval that only touches its excluded endpoint.
        """
        a, b = max(self.lo, lo), min(self.hi, hi)
        if a > b:
            return None
        if a == b and not self.applies(a):
            return None
        return a, b


@dataclass(frozen=True)
class Segment:
    """Affine graph piece y = slope*x + intercept over a domain interval."""

    domain: _Domain
    slope: Q
    intercept: Q

    def __post_init__(self) -> None:
        for x in (self.domain.lo, self.domain.hi):
            y = self.value_at(x)
            if y < ZERO or y > ONE:
                raise MapError(f"segment leaves [0, 1] at x={x}")

    def value_at(self, x: Q) -> Q:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class Rectangle:
    """Constant set value over a domain interval."""

    domain: _Domain
    value: ClosedSet


@dataclass(frozen=True)
class PointRule:
    """Set value attached to a single point."""

    at: Q
    value: ClosedSet


@dataclass(frozen=True)
class Band:
    """Interval value [lower(x), upper(x)] with affine boundaries."""

    domain: _Domain
    lower_slope: Q
    lower_intercept: Q
    upper_slope: Q
    upper_intercept: Q

    def __post_init__(self) -> None:
        for x in (self.domain.lo, self.domain.hi):
            lo, hi = self.lower_at(x), self.upper_at(x)
            if lo > hi:
                raise MapError(f"band boundaries cross at x={x}")
            if lo < ZERO or hi > ONE:
                raise MapError(f"band leaves [0, 1] at x={x}")

    def lower_at(self, x: Q) -> Q:
        return self.lower_slope * x + self.lower_intercept

    def upper_at(self, x: Q) -> Q:
        return self.upper_slope * x + self.upper_intercept


MapPiece = Union[Segment, Rectangle, PointRule, Band]


def segment(lo, hi, y_lo, y_hi, flags: str = "cc") -> Segment:
    """Segment through (lo, y_lo) and (hi, y_hi)."""
    lo, hi, y_lo, y_hi = as_q(lo), as_q(hi), as_q(y_lo), as_q(y_hi)
    if lo == hi:
        raise MapError("segment needs a nondegenerate domain; use a point rule")
    slope = (y_hi - y_lo) / (hi - lo)
    cl, ch = FLAG_TEXT[flags]
    return Segment(_Domain(lo, hi, cl, ch), slope, y_lo - slope * lo)


def rectangle(lo, hi, value: ClosedSet, flags: str = "cc") -> Rectangle:
    cl, ch = FLAG_TEXT[flags]
    return Rectangle(_Domain(as_q(lo), as_q(hi), cl, ch), value)


def point_rule(at, value: ClosedSet) -> PointRule:
    return PointRule(as_q(at), value)


def band(lo, hi, lower_pair, upper_pair, flags: str = "cc") -> Band:
    """Band with lower/upper boundary values given at the domain ends."""
    lo, hi = as_q(lo), as_q(hi)
    if lo == hi:
        raise MapError("band needs a nondegenerate domain; use a point rule")
    l0, l1 = as_q(lower_pair[0]), as_q(lower_pair[1])
    u0, u1 = as_q(upper_pair[0]), as_q(upper_pair[1])
    ls = (l1 - l0) / (hi - lo)
    us = (u1 - u0) / (hi - lo)
    cl, ch = FLAG_TEXT[flags]
    return Band(_Domain(lo, hi, cl, ch), ls, l0 - ls * lo, us, u0 - us * lo)


@dataclass(frozen=True)
class SetValuedMap:
    """A multivalued map on [0, 1] given by finitely many graph pieces.

    The value at x is the union of all piece values applying at x.  A
    well formed map has at least one applicable piece everywhere; a gap
    surfaces as DomainGap when evaluation reaches it.
    """

    pieces: tuple[MapPiece, ...]
    name: str = ""
    values_connected: Optional[bool] = None
    sources: tuple["SetValuedMap", ...] = ()

    def breakpoints(self) -> tuple[Q, ...]:
        pts = {ZERO, ONE}
        for p in self.pieces:
            if isinstance(p, PointRule):
                pts.add(p.at)
            else:
                pts.add(p.domain.lo)
                pts.add(p.domain.hi)
        return tuple(sorted(pts))


def make_map(pieces: Iterable[MapPiece], name: str = "",
             values_connected: Optional[bool] = None,
             sources: tuple[SetValuedMap, ...] = ()) -> SetValuedMap:
    return SetValuedMap(tuple(pieces), name, values_connected, sources)


@dataclass(frozen=True)
class FiniteSystem:
    """A multivalued map on a finite discrete space, given by a table.

    States carry string labels; the table is total and every value is a
    nonempty set of valid states.
    """

    states: tuple[str, ...]
    moves: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.states:
            raise MapError("a finite system needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise MapError("duplicate state labels")
        if len(self.moves) != len(self.states):
            raise MapError("table must cover every state")
        valid = set(self.states)
        for s, succ in zip(self.states, self.moves):
            if not succ:
                raise MapError(f"state {s!r} has an empty value")
            for t in succ:
                if t not in valid:
                    raise MapError(f"state {s!r} maps to unknown {t!r}")

    def successors(self, state: str) -> tuple[str, ...]:
        return self.moves[self.states.index(state)]

    def iterate(self, state: str, n: int) -> frozenset[str]:
        current = {state}
        for _ in range(n):
            nxt: set[str] = set()
            for s in current:
                nxt.update(self.successors(s))
            current = nxt
        return frozenset(current)


def finite_system(table: dict[str, Sequence[str]],
                  states: Optional[Sequence[str]] = None) -> FiniteSystem:
    order = tuple(states) if states is not None else tuple(sorted(table))
    return FiniteSystem(order, tuple(tuple(sorted(set(table[s]))) for s in order))


@dataclass(frozen=True)
class SemicontinuityVerdict:
    kind: str  # "usc" | "lsc"
    holds: bool
    witness: Optional[tuple[Q, ClosedSet]] = None


# -- evaluation and images ----------------------------------------------


def evaluate(f: SetValuedMap, x) -> ClosedSet:
    """F(x): the canonical union of all applicable piece values."""
    x = as_q(x)
    if x < ZERO or x > ONE:
        raise MapError(f"{x} is outside [0, 1]")
    parts: list = []
    for p in f.pieces:
        if isinstance(p, Segment):
            if p.domain.applies(x):
                parts.append(p.value_at(x))
        elif isinstance(p, Rectangle):
            if p.domain.applies(x):
                parts.append(p.value)
        elif isinstance(p, PointRule):
            if p.at == x:
                parts.append(p.value)
        else:
            if p.domain.applies(x):
                parts.append((p.lower_at(x), p.upper_at(x)))
    if not parts:
        raise DomainGap(f"no piece of {f.name or 'map'} applies at {x}")
    return canonicalize(parts)


def image(f: SetValuedMap, a: ClosedSet) -> ClosedSet:
    """F(A) = union of F(x) over x in A, as a closed set.

    Per segment the affine image of the (closure of the) overlap with A;
    per rectangle, point rule or band the value is contributed whenever
    the exact overlap is nonempty.
    """
    parts: list = []
    for lo, hi in a.components:
        for p in f.pieces:
            if isinstance(p, PointRule):
                if lo <= p.at <= hi:
                    parts.append(p.value)
                continue
            clipped = p.domain.clip_closed(lo, hi)
            if clipped is None:
                continue
            s, t = clipped
            if isinstance(p, Segment):
                ya, yb = p.value_at(s), p.value_at(t)
                parts.append((min(ya, yb), max(ya, yb)))
            elif isinstance(p, Rectangle):
                parts.append(p.value)
            else:
                los = (p.lower_at(s), p.lower_at(t))
                his = (p.upper_at(s), p.upper_at(t))
                parts.append((min(los), max(his)))
    if not parts:
        raise DomainGap("image over a set outside every piece domain")
    out = canonicalize(parts)
    if a.outer and not out.outer:
        out = ClosedSet(out.components, outer=True)
    return out


def iterate(f: Union[SetValuedMap, FiniteSystem], x, n: int):
    """F^n(x) by repeated image; n = 0 gives the singleton {x}."""
    if n < 0:
        raise MapError("iteration count must be nonnegative")
    if isinstance(f, FiniteSystem):
        return f.iterate(x, n)
    x = as_q(x)
    if n == 0:
        return point(x)
    current = evaluate(f, x)
    for _ in range(n - 1):
        current = image(f, current)
    return current


# -- one-sided limit sets and semicontinuity -----------------------------


def _limit_set(f: SetValuedMap, x: Q, side: str) -> Optional[ClosedSet]:
    """Limit of F(t) as t -> x from one side, None when x is a boundary."""
    parts: list = []
    for p in f.pieces:
        if isinstance(p, PointRule):
            continue
        dom = p.domain
        reaches = dom.accumulates_left(x) if side == "left" else dom.accumulates_right(x)
        if not reaches:
            continue
        if isinstance(p, Segment):
            parts.append(p.value_at(x))
        elif isinstance(p, Rectangle):
            parts.append(p.value)
        else:
            parts.append((p.lower_at(x), p.upper_at(x)))
    if not parts:
        return None
    return canonicalize(parts)


def usc_check(f: SetValuedMap) -> SemicontinuityVerdict:
    """Decide closedness of the graph symbolically.

    Away from breakpoints the active pieces are locally constant, so the
    graph can only fail to be closed above a breakpoint x, where the
    one-sided limit sets must be contained in F(x).
    """
    for x in f.breakpoints():
        value = evaluate(f, x)
        for side in ("left", "right"):
            lim = _limit_set(f, x, side)
            if lim is not None and not lim.subset_of(value):
                return SemicontinuityVerdict("usc", False, (x, lim))
    return SemicontinuityVerdict("usc", True)


def lsc_check(f: SetValuedMap) -> SemicontinuityVerdict:
    """Lower semicontinuity via one-sided limit sets at breakpoints.

    F is lsc at x exactly when F(x) is contained in the limit set from
    each side on which x can be approached.
    """
    for x in f.breakpoints():
        value = evaluate(f, x)
        if x > ZERO:
            lim = _limit_set(f, x, "left")
            if lim is None or not value.subset_of(lim):
                return SemicontinuityVerdict(
                    "lsc", False, (x, lim if lim is not None else value))
        if x < ONE:
            lim = _limit_set(f, x, "right")
            if lim is None or not value.subset_of(lim):
                return SemicontinuityVerdict(
                    "lsc", False, (x, lim if lim is not None else value))
    return SemicontinuityVerdict("lsc", True)


# -- preimages -----------------------------------------------------------


def preimage(f: SetValuedMap, y) -> Optional[ClosedSet]:
    """{x : y in F(x)}, or None when empty.

    Per segment the affine equation is solved; constant pieces return
    (the closure of) their domain when the value matches.
    """
    y = as_q(y)
    if y < ZERO or y > ONE:
        raise MapError(f"{y} is outside [0, 1]")
    parts: list = []
    for p in f.pieces:
        if isinstance(p, Segment):
            if p.slope == 0:
                if p.intercept == y:
                    parts.append((p.domain.lo, p.domain.hi))
            else:
                x = (y - p.intercept) / p.slope
                if p.domain.applies(x):
                    parts.append(x)
        elif isinstance(p, Rectangle):
            if p.value.contains(y):
                parts.append((p.domain.lo, p.domain.hi))
        elif isinstance(p, PointRule):
            if p.value.contains(y):
                parts.append(p.at)
        else:
            lo, hi = _band_slice(p, y)
            if lo is not None:
                parts.append((lo, hi))
    if not parts:
        return None
    return canonicalize(parts)


def _band_slice(p: Band, y: Q) -> tuple[Optional[Q], Optional[Q]]:
    """Solve lower(x) <= y <= upper(x) over the band domain (closure)."""
    lo, hi = p.domain.lo, p.domain.hi
    for slope, intercept, keep_below in (
        (p.lower_slope, p.lower_intercept, True),
        (p.upper_slope, p.upper_intercept, False),
    ):
        # keep_below: need slope*x + intercept <= y, else >= y
        if slope == 0:
            ok = intercept <= y if keep_below else intercept >= y
            if not ok:
                return None, None
            continue
        bound = (y - intercept) / slope
        want_low = (slope > 0) == keep_below
        if want_low:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    if lo > hi:
        return None, None
    return lo, hi


def is_single_valued(f: SetValuedMap) -> bool:
    """True when every piece is a segment and values at breakpoints agree."""
    if not all(isinstance(p, Segment) for p in f.pieces):
        return False
    for x in f.breakpoints():
        try:
            if not evaluate(f, x).is_finite() or len(evaluate(f, x).points()) != 1:
                return False
        except DomainGap:
            return False
    return True


def preimage_union_map(fs: Sequence[SetValuedMap], name: str = "") -> SetValuedMap:
    """Map x -> union of f_i^{-1}(x) for single valued onto piecewise maps.

    The graph of the result is the reflection of the input graphs across
    the diagonal, so evaluation solves the same affine equations as
    preimage() does.  Each f_i must be onto [0, 1]; that hypothesis is
    checked exactly via image(f_i, [0, 1]).
    """
    full = interval(0, 1)
    pieces: list[MapPiece] = []
    for i, f in enumerate(fs):
        if not is_single_valued(f):
            raise MapError(f"component map #{i} ({f.name!r}) is not single valued")
        if image(f, full) != full:
            raise NotOnto(f"component map #{i} ({f.name!r}) is not onto [0, 1]")
        for p in f.pieces:
            assert isinstance(p, Segment)
            ya, yb = p.value_at(p.domain.lo), p.value_at(p.domain.hi)
            if p.slope == 0:
                pieces.append(PointRule(ya, interval(p.domain.lo, p.domain.hi)))
            else:
                inv_slope = 1 / p.slope
                pieces.append(Segment(
                    _Domain(min(ya, yb), max(ya, yb)),
                    inv_slope, -p.intercept * inv_slope))
    return SetValuedMap(tuple(pieces), name or "preimage_union",
                        sources=tuple(fs))


# -- connectedness of values ---------------------------------------------


def _boundary_functions(f: SetValuedMap) -> list[tuple[_Domain, Q, Q]]:
    """Affine boundary functions (domain, slope, intercept) of piece values."""
    fns: list[tuple[_Domain, Q, Q]] = []
    for p in f.pieces:
        if isinstance(p, Segment):
            fns.append((p.domain, p.slope, p.intercept))
        elif isinstance(p, Rectangle):
            for lo, hi in p.value.components:
                fns.append((p.domain, ZERO, lo))
                fns.append((p.domain, ZERO, hi))
        elif isinstance(p, Band):
            fns.append((p.domain, p.lower_slope, p.lower_intercept))
            fns.append((p.domain, p.upper_slope, p.upper_intercept))
    return fns


def values_connected_check(f: SetValuedMap) -> tuple[bool, Optional[Q]]:
    """Is F(x) a single interval for every x?  Returns (answer, witness).

    Between consecutive critical points (breakpoints plus crossings of
    piece boundary functions) the component structure of F(x) cannot
    change, so checking the critical points and one interior sample per
    cell decides the question exactly.
    """
    criticals = set(f.breakpoints())
    fns = _boundary_functions(f)
    for i, (dom_a, sa, ba) in enumerate(fns):
        for dom_b, sb, bb in fns[i + 1:]:
            if sa == sb:
                continue
            x = (bb - ba) / (sa - sb)
            lo = max(dom_a.lo, dom_b.lo)
            hi = min(dom_a.hi, dom_b.hi)
            if lo <= x <= hi and ZERO <= x <= ONE:
                criticals.add(x)
    ordered = sorted(criticals)
    probes = list(ordered)
    for a, b in zip(ordered, ordered[1:]):
        probes.append((a + b) / 2)
    for x in sorted(probes):
        if len(evaluate(f, x).components) > 1:
            return False, x
    return True, None


def constant_value(f: SetValuedMap) -> Optional[ClosedSet]:
    """The constant value of F when F(x) is the same set for all x, else None.

    Exact: on each cell between breakpoints the rectangle contribution R
    is constant; equality of F(x) with C for all x forces C \\ R to be
    covered by constant segments and every moving segment to stay in C.
    """
    c = evaluate(f, ZERO)
    bps = f.breakpoints()
    for x in bps:
        if evaluate(f, x) != c:
            return None
    for a, b in zip(bps, bps[1:]):
        mid = (a + b) / 2
        if evaluate(f, mid) != c:
            return None
        rect_parts: list = []
        moving: list[tuple[Q, Q, Q, Q]] = []  # (value at a, value at b) pairs
        for p in f.pieces:
            if isinstance(p, PointRule):
                continue
            if not (p.domain.lo <= a and b <= p.domain.hi):
                continue
            if isinstance(p, Rectangle):
                rect_parts.append(p.value)
            elif isinstance(p, Segment):
                moving.append((p.value_at(a), p.value_at(b), p.slope, p.intercept))
            else:
                if p.lower_slope != 0 or p.upper_slope != 0:
                    return None
                rect_parts.append(interval(p.lower_intercept, p.upper_intercept))
        for ya, yb, slope, _ in moving:
            lo, hi = min(ya, yb), max(ya, yb)
            if not interval(lo, hi).subset_of(c):
                return None
        if rect_parts:
            r = canonicalize(rect_parts)
            if r == c:
                continue
            if not r.subset_of(c):
                return None
            residue = _set_difference_points(c, r)
            if residue is None:
                return None
            consts = {ya for ya, yb, slope, _ in moving if slope == 0}
            if not all(pt in consts for pt in residue):
                return None
        else:
            # no rectangles: C must be covered by constant segments alone
            if not c.is_finite():
                return None
            consts = {ya for ya, yb, slope, _ in moving if slope == 0}
            if not all(pt in consts for pt in c.points()):
                return None
    return c


def _set_difference_points(c: ClosedSet, r: ClosedSet) -> Optional[tuple[Q, ...]]:
    """C \\ R when it is a finite point set; None when it has an interval."""
    leftovers: list[Q] = []
    for lo, hi in c.components:
        cuts = [lo] + [x for comp in r.components for x in comp
                       if lo <= x <= hi] + [hi]
        cuts = sorted(set(cuts))
        for a, b in zip(cuts, cuts[1:]):
            mid = (a + b) / 2
            if not r.contains(mid):
                return None
        for x in cuts:
            if not r.contains(x):
                leftovers.append(x)
    return tuple(sorted(set(leftovers)))
