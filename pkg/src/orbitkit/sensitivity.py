"""Witness-search probes for the four sensitivity notions.

The notions quantify over every point and every neighbourhood size, so a
finite probe can only do two honest things: produce an exact witness
(per base point and perturbation size), or report that the budget found
none.  Refutations need structure, and two kinds of certificates supply
it: a base whose forward sets are permanently the whole interval cannot
witness the neighbourhood-escape condition, and a map that is a single
valued system away from finitely many full-valued points splits every
perturbed orbit into an eventually-absorbed branch (separation dies) or
a forever-singleton branch (proximality dies).

Conditions checked, for forward sets A = F^m(x) and B = F^m(y):
  strong     some point of B at distance >= eps from A (directed excess)
  sensitive  Hausdorff distance (A, B) >= eps
  weak       max point distance (A, B) >= eps, which by the projection
             identity realizes separation of single orbit threads
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Union

from ._util import parallel_map
from .setmap import (
    FiniteSystem,
    PointRule,
    Segment,
    SetValuedMap,
    constant_value,
    evaluate,
    image,
)
from .space import (
    ClosedSet,
    ONE,
    Q,
    ZERO,
    as_q,
    directed_excess,
    format_set,
    hausdorff,
    interval,
    maxdist,
    point,
)

KINDS = ("strong", "sensitive", "weak")


class SensitivityError(ValueError):
    pass


@dataclass(frozen=True)
class ProbeBudget:
    """Deterministic search budget: bases, perturbation sizes, candidates.

    Candidate perturbations include dyadic and odd-denominator offsets;
    the latter keep tent-like orbits away from the absorbing dyadic
    points, which is what recurrent separation witnesses need.
    """

    grid_step: Q = Q(1, 8)
    deltas: tuple[Q, ...] = (Q(1, 8), Q(1, 32), Q(1, 128))
    horizon: int = 64
    offsets: tuple[Q, ...] = (Q(1, 2), Q(1, 3), Q(1, 5))
    include_breakpoints: bool = True

    def base_points(self, f: SetValuedMap) -> tuple[Q, ...]:
        m = self.grid_step.denominator
        pts = {Q(i * self.grid_step.numerator, m) for i in range(m + 1)}
        if self.include_breakpoints:
            pts.update(f.breakpoints())
        return tuple(sorted(p for p in pts if ZERO <= p <= ONE))

    def candidates(self, f: SetValuedMap, x: Q, delta: Q) -> tuple[Q, ...]:
        pts = {x}
        for o in self.offsets:
            pts.add(x + delta * o)
            pts.add(x - delta * o)
        m = self.grid_step.denominator
        lo, hi = x - delta, x + delta
        for i in range(math.ceil(lo * m), math.floor(hi * m) + 1):
            pts.add(Q(i, m))
        if self.include_breakpoints:
            pts.update(b for b in f.breakpoints() if lo < b < hi)
        keep = [p for p in pts
                if ZERO <= p <= ONE and (abs(p - x) < delta or p == x)]
        return tuple(sorted(keep))


@dataclass(frozen=True)
class SensitivityWitness:
    """An exact, replayable witness for one condition instance."""

    kind: str
    x: Q
    y: Q
    m: int
    eps: Q
    measured: tuple[tuple[str, str], ...]

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "x": str(self.x),
            "y": str(self.y),
            "m": self.m,
            "eps": str(self.eps),
            "measured": [list(kv) for kv in self.measured],
        }, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SensitivityWitness":
        raw = json.loads(text)
        return SensitivityWitness(
            raw["kind"], Q(raw["x"]), Q(raw["y"]), int(raw["m"]),
            Q(raw["eps"]), tuple((k, v) for k, v in raw["measured"]))


@dataclass(frozen=True)
class ProbeOutcome:
    status: str  # witnessed_yes | no_witness_at_budget
    witnesses: tuple  # SensitivityWitness for interval maps, dicts otherwise
    impossibilities: tuple[dict, ...]
    gaps: tuple[dict, ...]
    budget: dict

    @property
    def headline(self):
        """The lexicographically smallest witness, when any exist."""
        ordered = [w for w in self.witnesses
                   if isinstance(w, SensitivityWitness)]
        if ordered:
            return min(ordered, key=lambda w: (w.x, w.y, w.m))
        return self.witnesses[0] if self.witnesses else None


def _forward_sets(f: SetValuedMap, x: Q, horizon: int,
                  cache: dict) -> list[ClosedSet]:
    if x not in cache:
        sets = [point(x)]
        for _ in range(horizon):
            sets.append(image(f, sets[-1]))
        cache[x] = sets
    return cache[x]


def condition_measure(kind: str, a: ClosedSet, b: ClosedSet) -> Q:
    if kind == "strong":
        return directed_excess(b, a)
    if kind == "sensitive":
        return hausdorff(a, b)
    if kind == "weak":
        return maxdist(a, b)
    raise SensitivityError(f"unknown sensitivity kind {kind!r}")


def _full_forever(f: SetValuedMap, xs: list[ClosedSet]) -> bool:
    """A verified fixpoint argument: the sets are the whole interval from
    step one on, and the whole interval maps onto itself."""
    full = interval(0, 1)
    return (len(xs) > 1 and xs[1] == full and image(f, full) == full
            and all(s == full for s in xs[1:]))


def sensitivity_probe(
    kind: str,
    f: Union[SetValuedMap, FiniteSystem],
    eps,
    budget: Optional[ProbeBudget] = None,
) -> ProbeOutcome:
    """Search for witnesses at every (base point, perturbation size) pair.

    witnessed_yes means each pair produced an exact re-checked witness.
    Otherwise no_witness_at_budget, with per-base impossibility
    certificates where they can be proven.
    """
    if kind not in KINDS:
        raise SensitivityError(f"unknown sensitivity kind {kind!r}")
    eps = as_q(eps)
    if eps <= 0:
        raise SensitivityError("eps must be positive")
    if isinstance(f, FiniteSystem):
        return _discrete_probe(kind, f, eps)
    budget = budget or ProbeBudget()
    meta = {"kind": kind, "eps": str(eps), "horizon": budget.horizon,
            "grid_step": str(budget.grid_step),
            "deltas": [str(d) for d in budget.deltas]}

    cache: dict = {}
    witnesses: list[SensitivityWitness] = []
    impossibilities: list[dict] = []
    gaps: list[dict] = []

    const = constant_value(f) if kind in ("strong", "sensitive") else None
    if const is not None:
        return ProbeOutcome("no_witness_at_budget", (), ({
            "kind": "constant_map",
            "value": format_set(const),
            "reason": "all forward sets coincide, no separation possible",
        },), (), meta)

    def probe_base(x: Q) -> tuple[list, list, list]:
        wit, imp, gap = [], [], []
        xs = _forward_sets(f, x, budget.horizon, cache)
        if kind == "strong" and _full_forever(f, xs):
            imp.append({
                "kind": "full_orbit",
                "base": str(x),
                "reason": "forward sets equal the whole interval for every "
                          "step, and nothing escapes its neighbourhood",
            })
            gap.extend({"base": str(x), "delta": str(d)}
                       for d in budget.deltas)
            return wit, imp, gap
        for delta in budget.deltas:
            found = None
            for y in budget.candidates(f, x, delta):
                ys = _forward_sets(f, y, budget.horizon, cache)
                for m in range(1, budget.horizon + 1):
                    value = condition_measure(kind, xs[m], ys[m])
                    if value >= eps:
                        found = SensitivityWitness(
                            kind, x, y, m, eps,
                            (("measure", str(value)),
                             ("delta", str(delta))))
                        break
                if found:
                    break
            if found:
                wit.append(found)
            else:
                gap.append({"base": str(x), "delta": str(delta)})
        return wit, imp, gap

    results = parallel_map(probe_base, list(budget.base_points(f)))
    for wit, imp, gap in results:
        witnesses.extend(wit)
        impossibilities.extend(imp)
        gaps.extend(gap)

    status = "witnessed_yes" if not gaps else "no_witness_at_budget"
    return ProbeOutcome(status, tuple(witnesses), tuple(impossibilities),
                        tuple(gaps), meta)


def _discrete_probe(kind: str, s: FiniteSystem, eps: Q) -> ProbeOutcome:
    """Discrete metric: no distinct point is ever within a small
    neighbourhood, so the perturbed point is the base itself and only the
    branchwise condition can ever fire."""
    meta = {"kind": kind, "eps": str(eps), "space": "finite"}
    if eps > 1:
        return ProbeOutcome("no_witness_at_budget", (), ({
            "kind": "diameter",
            "reason": "the discrete metric never exceeds 1"},), (), meta)
    witnesses = []
    gaps = []
    for st in s.states:
        found = None
        if kind == "weak":
            current = frozenset({st})
            for m in range(1, 2 ** len(s.states) + 1):
                current = frozenset(
                    t for u in current for t in s.successors(u))
                if len(current) > 1:
                    found = {"base": st, "m": m}
                    break
        if found:
            witnesses.append(found)
        else:
            gaps.append({"base": st})
    status = "witnessed_yes" if not gaps else "no_witness_at_budget"
    return ProbeOutcome(status, tuple(witnesses), (), tuple(gaps), meta)


# -- recurrent separation (the proximal-and-often-separated notion) -------


@dataclass(frozen=True)
class RecurrentSeparationOutcome:
    status: str
    witnesses: tuple[dict, ...]
    refutations: tuple[dict, ...]
    gaps: tuple[dict, ...]
    budget: dict


def _dichotomy_refutation(f: SetValuedMap, x: Q, xs: list[ClosedSet],
                          eps: Q, eta: Q) -> Optional[dict]:
    """Refute recurrent separation at a base whose forward sets are the
    whole interval, when the map is a single valued system except for
    finitely many full-valued points.

    Every perturbed point then either eventually feeds a full-valued
    point (its sets become the whole interval: distances vanish, so
    separation cannot recur) or never does (its sets stay singletons:
    the distance to the full interval never drops below half its width,
    so proximality fails whenever eta is at most that bound).
    """
    full = interval(0, 1)
    specials = []
    for p in f.pieces:
        if isinstance(p, Segment):
            continue
        if isinstance(p, PointRule) and evaluate(f, p.at) == full:
            specials.append(p.at)
            continue
        return None
    if not _full_forever(f, xs):
        return None
    # a singleton is farthest into the interval at its midpoint
    gap_bound = hausdorff(full, point((full.min + full.max) / 2))
    if eta > gap_bound:
        return None
    return {
        "kind": "dichotomy",
        "base": str(x),
        "full_valued_points": [str(t) for t in sorted(specials)],
        "absorbed_branch": "distances are eventually zero, so separation "
                           "beyond eps stops recurring",
        "singleton_branch": f"distance to the full interval stays >= "
                            f"{gap_bound}, so proximality below {eta} fails",
        "singleton_gap_bound": str(gap_bound),
    }


def recurrent_separation_probe(
    f: Union[SetValuedMap, FiniteSystem],
    eps,
    eta,
    window: tuple[int, int] = (1, 64),
    budget: Optional[ProbeBudget] = None,
    min_separations: int = 10,
) -> RecurrentSeparationOutcome:
    """Windowed surrogate for proximal-yet-often-separated pairs.

    A witness pair must come within eta somewhere in the window (the
    stand-in for vanishing lower distance) and exceed eps at many
    separate indices (the stand-in for recurring separation).  Both the
    strict and non-strict separation counts are recorded, since the two
    comparison conventions differ in the source notions.
    """
    eps, eta = as_q(eps), as_q(eta)
    if eps <= 0 or eta <= 0:
        raise SensitivityError("eps and eta must be positive")
    k1, k2 = window
    if not 1 <= k1 < k2:
        raise SensitivityError("window must satisfy 1 <= K1 < K2")
    meta = {"eps": str(eps), "eta": str(eta), "window": [k1, k2],
            "min_separations": min_separations}
    if isinstance(f, FiniteSystem):
        return RecurrentSeparationOutcome(
            "no_witness_at_budget", (), ({
                "kind": "discrete",
                "reason": "the only point in a small neighbourhood is the "
                          "point itself, whose distances are identically "
                          "zero"},), (), meta)
    budget = budget or ProbeBudget(horizon=k2)
    if budget.horizon < k2:
        budget = ProbeBudget(budget.grid_step, budget.deltas, k2,
                             budget.offsets, budget.include_breakpoints)
    cache: dict = {}
    witnesses: list[dict] = []
    refutations: list[dict] = []
    gaps: list[dict] = []

    for x in budget.base_points(f):
        xs = _forward_sets(f, x, budget.horizon, cache)
        cert = _dichotomy_refutation(f, x, xs, eps, eta)
        if cert is not None:
            refutations.append(cert)
            continue
        for delta in budget.deltas:
            found = None
            for y in budget.candidates(f, x, delta):
                if y == x:
                    continue
                ys = _forward_sets(f, y, budget.horizon, cache)
                dists = [hausdorff(xs[n], ys[n]) for n in range(k1, k2 + 1)]
                close = min(dists)
                strict = sum(1 for d in dists if d > eps)
                loose = sum(1 for d in dists if d >= eps)
                if close < eta and strict >= min_separations:
                    peak = max(dists)
                    found = {
                        "x": str(x), "y": str(y), "delta": str(delta),
                        "min_distance": str(close),
                        "max_distance": str(peak),
                        "argmax": k1 + dists.index(peak),
                        "separations_strict": strict,
                        "separations_nonstrict": loose,
                    }
                    break
            if found:
                witnesses.append(found)
            else:
                gaps.append({"base": str(x), "delta": str(delta)})

    status = "witnessed_yes" if not gaps and not refutations \
        else "no_witness_at_budget"
    return RecurrentSeparationOutcome(
        status, tuple(witnesses), tuple(refutations), tuple(gaps), meta)


# -- witness replay ----------------------------------------------------------


def replay_witness(f: SetValuedMap, w: SensitivityWitness) -> Q:
    """Recompute the witness measure from scratch; exact reproduction."""
    a = point(w.x)
    b = point(w.y)
    for _ in range(w.m):
        a = image(f, a)
        b = image(f, b)
    return condition_measure(w.kind, a, b)


WEAKER_THAN = {"strong": ("sensitive", "weak"), "sensitive": ("weak",),
               "weak": ()}


def implied_witnesses(f: SetValuedMap, w: SensitivityWitness) -> list[SensitivityWitness]:
    """Replay a witness through every weaker condition at the same data.

    A neighbourhood-escape witness separates in Hausdorff distance, and a
    Hausdorff witness separates some pair of orbit threads; both follow
    from the measure inequalities and are re-verified exactly here.
    """
    out = []
    for weaker in WEAKER_THAN[w.kind]:
        a = point(w.x)
        b = point(w.y)
        for _ in range(w.m):
            a = image(f, a)
            b = image(f, b)
        value = condition_measure(weaker, a, b)
        if value < w.eps:
            raise SensitivityError(
                f"{w.kind} witness failed the {weaker} replay")
        out.append(SensitivityWitness(
            weaker, w.x, w.y, w.m, w.eps, (("measure", str(value)),)))
    return out
