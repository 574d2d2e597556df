"""Transitivity and orbit-density probes with certificate-carrying verdicts.

Grid probes can only certify one direction each, so results use a
three-way vocabulary: ``certified_yes`` and ``certified_no`` carry
independently re-checkable evidence, everything else is ``inconclusive``.
A yes for transitivity is a statement at the grid resolution (all open
sets containing a grid cell); a no is a genuine refutation, obtained
either from unreachability in the exact cell transition graph or from an
exactly iterated forward set that provably cycles away from a target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from ._util import parallel_map
from .setmap import (
    FiniteSystem,
    SetValuedMap,
    evaluate,
    image,
    preimage,
)
from .space import (
    ClosedSet,
    Q,
    as_q,
    canonicalize,
    cell_interval,
    cells_meeting,
    format_set,
    grid_size,
    intersection,
    point,
)


class AnalysisError(ValueError):
    pass


class TooLarge(AnalysisError):
    """A finite system exceeds the exact-oracle size bound."""


class NotWeakDense(AnalysisError):
    """The dense-orbit builder found an unreachable cell."""

    def __init__(self, cell, message: str):
        super().__init__(message)
        self.cell = cell


@dataclass(frozen=True)
class TransitionGraph:
    """Exact cell-to-cell reachability substrate at resolution 1/m.

    edge(c, c') holds when image(F, cell c) meets cell c'; images are
    exact, so absence of a walk is a sound refutation.  Cells sharing an
    endpoint see each other whenever the image touches the boundary; this
    over-approximation is deliberate and documented.
    """

    map: SetValuedMap
    eps: Q
    succ: tuple[tuple[int, ...], ...]

    @property
    def cells(self) -> int:
        return len(self.succ)

    def reachable_from(self, c: int) -> frozenset[int]:
        """Cells reachable in one or more steps."""
        seen: set[int] = set()
        frontier = list(self.succ[c])
        while frontier:
            nxt = frontier.pop()
            if nxt not in seen:
                seen.add(nxt)
                frontier.extend(self.succ[nxt])
        return frozenset(seen)


@dataclass(frozen=True)
class Verdict:
    status: str  # certified_yes | certified_no | inconclusive
    witness: Optional[dict] = None
    budget: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DensityReport:
    """Per-cell first-hit horizons plus the certificate, when one exists."""

    first_hit: tuple[Optional[int], ...]
    certificate: Optional[dict] = None


@dataclass(frozen=True)
class DensityResult:
    verdict: Verdict
    report: DensityReport


def transition_graph(f: SetValuedMap, eps) -> TransitionGraph:
    eps = as_q(eps)
    m = grid_size(eps)
    succ = parallel_map(
        lambda c: cells_meeting(image(f, cell_interval(c, m)), m), range(m))
    graph = TransitionGraph(f, eps, tuple(succ))
    assert all(graph.succ[c] for c in range(m)), "total map left an empty row"
    return graph


def to_dot(graph: TransitionGraph) -> str:
    """GraphViz text for the cell digraph (deterministic ordering)."""
    m = graph.cells
    lines = ["digraph transition {", "  rankdir=LR;"]
    for c in range(m):
        lines.append(f'  c{c} [label="[{Q(c, m)},{Q(c + 1, m)}]"];')
    for c in range(m):
        for d in graph.succ[c]:
            lines.append(f"  c{c} -> c{d};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- forward set iteration with cycle detection ---------------------------


@dataclass(frozen=True)
class ForwardRun:
    """Exactly iterated value sets S_k = F^k(S_0) with cycle bookkeeping.

    When the sequence of canonical sets repeats (entered at ``enter``,
    period ``period``), the union of one full cycle is invariant under
    the map, so the visited union is the entire forward closure.
    """

    sets: tuple[ClosedSet, ...]
    enter: Optional[int] = None
    period: Optional[int] = None

    @property
    def cycled(self) -> bool:
        return self.enter is not None

    def visited_union(self, from_k: int = 1) -> ClosedSet:
        return canonicalize(self.sets[from_k:])

    def invariant_union(self) -> ClosedSet:
        assert self.enter is not None and self.period is not None
        return canonicalize(self.sets[self.enter:self.enter + self.period])


def forward_run(f: SetValuedMap, start: ClosedSet, horizon: int) -> ForwardRun:
    sets = [start]
    seen = {start: 0}
    for k in range(1, horizon + 1):
        nxt = image(f, sets[-1])
        if nxt in seen:
            return ForwardRun(tuple(sets + [nxt]), seen[nxt], k - seen[nxt])
        seen[nxt] = k
        sets.append(nxt)
    return ForwardRun(tuple(sets))


# -- witness sampling ------------------------------------------------------


def _preimage_pool(f: SetValuedMap, depth: int, cap: int = 512) -> tuple[Q, ...]:
    """Breakpoints of the iterated map: iterated point preimages of the
    map's own breakpoints.  These are where piecewise-linear behaviour
    changes under F^k, so they make good deterministic witness seeds."""
    pool: set[Q] = set(f.breakpoints())
    frontier = set(pool)
    for _ in range(depth):
        grown: set[Q] = set()
        for y in sorted(frontier):
            back = preimage(f, y)
            if back is None:
                continue
            for lo, hi in back.components:
                grown.add(lo)
                grown.add(hi)
        frontier = grown - pool
        pool |= grown
        if len(pool) > cap:
            break
    return tuple(sorted(pool)[:cap])


def _cell_samples(pool: Sequence[Q], c: int, m: int, cap: int = 16) -> list[Q]:
    lo, hi = Q(c, m), Q(c + 1, m)
    pts = {lo, hi, (lo + hi) / 2}
    pts.update(p for p in pool if lo <= p <= hi)
    return sorted(pts)[:cap]


# -- transitivity ----------------------------------------------------------


def transitivity_probe(f: SetValuedMap, eps, horizon: int,
                       preimage_depth: int = 4) -> Verdict:
    """Three-way transitivity decision at grid resolution eps.

    certified_no: some ordered cell pair (U, V) is separated, shown by a
    missing walk in the exact transition graph or by an exactly iterated
    forward closure of U that cycles without ever meeting V.
    certified_yes: every ordered cell pair has a concrete re-checked
    witness x in U with F^k(x) meeting V at some k <= horizon.
    """
    eps = as_q(eps)
    m = grid_size(eps)
    graph = transition_graph(f, eps)
    budget = {"eps": str(eps), "horizon": horizon,
              "preimage_depth": preimage_depth}

    for u in range(m):
        reach = graph.reachable_from(u)
        for v in range(m):
            if v not in reach:
                return Verdict("certified_no", {
                    "kind": "no_walk",
                    "from_cell": u,
                    "to_cell": v,
                }, budget)

    pool = _preimage_pool(f, preimage_depth)
    runs: dict[Q, ForwardRun] = {}

    def run_for(x: Q) -> ForwardRun:
        if x not in runs:
            runs[x] = forward_run(f, point(x), horizon)
        return runs[x]

    witnesses = []
    unwitnessed = []
    for u in range(m):
        samples = _cell_samples(pool, u, m)
        for v in range(m):
            target = cell_interval(v, m)
            found = None
            for x in samples:
                for k, s in enumerate(run_for(x).sets):
                    if k >= 1 and intersection(s, target) is not None:
                        found = {"from_cell": u, "to_cell": v,
                                 "x": str(x), "k": k}
                        break
                if found:
                    break
            if found:
                witnesses.append(found)
            else:
                unwitnessed.append((u, v))

    if not unwitnessed:
        return Verdict("certified_yes", {"witnesses": witnesses}, budget)

    for u, v in unwitnessed:
        run = forward_run(f, cell_interval(u, m), horizon)
        if not run.cycled:
            continue
        closure = run.visited_union(1)
        target_lo, target_hi = Q(v, m), Q(v + 1, m)
        if not closure.meets_open(target_lo, target_hi):
            inv = run.invariant_union()
            assert image(f, inv).subset_of(inv)
            return Verdict("certified_no", {
                "kind": "forward_closure",
                "from_cell": u,
                "to_cell": v,
                "closure": format_set(closure),
                "invariant": format_set(inv),
                "cycle_enter": run.enter,
                "cycle_period": run.period,
            }, budget)

    return Verdict("inconclusive", {"unwitnessed_pairs": unwitnessed}, budget)


# -- weak density ----------------------------------------------------------


def weak_dense_probe(f: SetValuedMap, p, eps, horizon: int) -> DensityResult:
    """Does every grid cell meet some forward set F^k(p), k >= 1?

    certified_yes records a first-hit horizon per cell.  certified_no
    carries a trap certificate: the exactly iterated set sequence enters
    a cycle whose one-period union J satisfies image(F, J) = J, or a
    union of cells closed under the transition relation, in either case
    missing some cell's interior.
    """
    p, eps = as_q(p), as_q(eps)
    m = grid_size(eps)
    budget = {"eps": str(eps), "horizon": horizon, "point": str(p)}
    first_hit: list[Optional[int]] = [None] * m
    run = forward_run(f, point(p), horizon)
    for k, s in enumerate(run.sets):
        if k == 0:
            continue
        for c in cells_meeting(s, m):
            if first_hit[c] is None:
                first_hit[c] = k
    if all(h is not None for h in first_hit):
        return DensityResult(
            Verdict("certified_yes", {"first_hit": list(first_hit)}, budget),
            DensityReport(tuple(first_hit)))

    missed = [c for c in range(m)
              if not run.visited_union(1).meets_open(Q(c, m), Q(c + 1, m))]
    if run.cycled and missed:
        inv = run.invariant_union()
        assert image(f, inv) == inv
        cert = {
            "kind": "cycle_trap",
            "trap": format_set(inv),
            "visited": format_set(run.visited_union(1)),
            "cycle_enter": run.enter,
            "cycle_period": run.period,
            "missed_cells": missed,
        }
        return DensityResult(
            Verdict("certified_no", cert, budget),
            DensityReport(tuple(first_hit), cert))

    # fall back to a cell-union trap: the transition closure of the cells
    # of F(p) is invariant by construction; re-check invariance exactly.
    graph = transition_graph(f, eps)
    start_cells = set(cells_meeting(evaluate(f, p), m))
    closure: set[int] = set(start_cells)
    frontier = list(start_cells)
    while frontier:
        c = frontier.pop()
        for d in graph.succ[c]:
            if d not in closure:
                closure.add(d)
                frontier.append(d)
    if len(closure) < m:
        trap = canonicalize([(Q(c, m), Q(c + 1, m)) for c in sorted(closure)])
        assert image(f, trap).subset_of(trap)
        cert = {
            "kind": "cell_trap",
            "trap": format_set(trap),
            "trap_cells": sorted(closure),
            "missed_cells": sorted(set(range(m)) - closure),
        }
        return DensityResult(
            Verdict("certified_no", cert, budget),
            DensityReport(tuple(first_hit), cert))

    return DensityResult(
        Verdict("inconclusive", {"first_hit": list(first_hit)}, budget),
        DensityReport(tuple(first_hit)))


def dense_orbit_build(f: SetValuedMap, p, eps, horizon: int) -> tuple[Q, ...]:
    """An exact orbit prefix visiting every grid cell, by chaining hits.

    From the current point, forward sets are iterated until they meet the
    next target cell; a hit point is then connected back through exact
    preimages inside the forward sets.  Greedy (no backtracking over the
    choice of hit point), so success is a certificate while failure is
    only a failure of this strategy at this budget.
    """
    p, eps = as_q(p), as_q(eps)
    m = grid_size(eps)
    prefix: list[Q] = [p]
    current = p
    for c in range(m):
        target = cell_interval(c, m)
        if target.contains(current):
            continue
        sets = [point(current)]
        hit_k = None
        for k in range(1, horizon + 1):
            sets.append(image(f, sets[-1]))
            if intersection(sets[-1], target) is not None:
                hit_k = k
                break
        if hit_k is None:
            raise NotWeakDense(
                c, f"cell {c} not reached from {current} within {horizon}")
        meet = intersection(sets[hit_k], target)
        assert meet is not None
        chain = [meet.min]
        for i in range(hit_k - 1, 0, -1):
            back = preimage(f, chain[0])
            assert back is not None, "backchain lost its witness"
            options = intersection(back, sets[i])
            assert options is not None, "backchain lost its witness"
            picked = None
            for lo, hi in options.components:
                for cand in (lo, hi, (lo + hi) / 2):
                    if evaluate(f, cand).contains(chain[0]):
                        picked = cand
                        break
                if picked is not None:
                    break
            assert picked is not None, "no verifiable backchain point"
            chain.insert(0, picked)
        prefix.extend(chain)
        current = prefix[-1]
    for a, b in zip(prefix, prefix[1:]):
        assert evaluate(f, a).contains(b), "built prefix is not an orbit"
    return tuple(prefix)


def dense_walk_build(s: FiniteSystem, start: str) -> tuple[str, ...]:
    """A walk from start visiting every state, by chaining shortest hops."""
    walk = [start]
    for goal in s.states:
        if goal in walk:
            continue
        hop = _shortest_walk(s, walk[-1], goal)
        if hop is None:
            raise NotWeakDense(goal, f"state {goal!r} unreachable from {walk[-1]!r}")
        walk.extend(hop[1:])
    return tuple(walk)


def _shortest_walk(s: FiniteSystem, a: str, b: str) -> Optional[list[str]]:
    """Shortest walk a -> b of length >= 1, or None."""
    frontier = [[a]]
    seen = set()
    while frontier:
        nxt = []
        for path in frontier:
            for t in s.successors(path[-1]):
                if t == b:
                    return path + [t]
                if t not in seen:
                    seen.add(t)
                    nxt.append(path + [t])
        frontier = nxt
    return None


# -- minimality -------------------------------------------------------------


@dataclass(frozen=True)
class MinimalityResult:
    dense_minimal: Verdict
    weak_dense_minimal: Verdict


def minimality_check(
    f: Union[SetValuedMap, FiniteSystem], eps=None, horizon: int = 64,
    sample: Optional[Sequence] = None,
) -> MinimalityResult:
    """Do all points have dense / weak dense orbits?

    Finite systems are decided exactly.  Interval maps aggregate per
    sample point probe results: any certified_no propagates, and yes is
    only claimed at the probe resolution.
    """
    if isinstance(f, FiniteSystem):
        report = finite_oracle(f)
        dm = all(report.dense_orbit[s] for s in f.states)
        wm = all(report.weak_dense_orbit[s] for s in f.states)
        exact = {"method": "exact"}
        return MinimalityResult(
            Verdict("certified_yes" if dm else "certified_no",
                    {"per_state": dict(report.dense_orbit)}, exact),
            Verdict("certified_yes" if wm else "certified_no",
                    {"per_state": dict(report.weak_dense_orbit)}, exact))

    eps = as_q(eps if eps is not None else Q(1, 8))
    m = grid_size(eps)
    if sample is None:
        sample = sorted({Q(c, m) for c in range(m + 1)}
                        | {Q(2 * c + 1, 2 * m) for c in range(m)})
    sample = [as_q(x) for x in sample]
    budget = {"eps": str(eps), "horizon": horizon,
              "sample_size": len(sample)}

    weak_status = "certified_yes"
    weak_witness: Optional[dict] = None
    dense_status = "certified_yes"
    dense_witness: Optional[dict] = None
    for x in sample:
        res = weak_dense_probe(f, x, eps, horizon)
        if res.verdict.status == "certified_no":
            weak_status = "certified_no"
            weak_witness = {"point": str(x), **(res.verdict.witness or {})}
            # no weak dense orbit at x rules out a dense orbit at x too
            dense_status = "certified_no"
            dense_witness = weak_witness
            break
        if res.verdict.status != "certified_yes" and weak_status != "certified_no":
            weak_status = "inconclusive"
    if dense_status != "certified_no":
        for x in sample:
            try:
                dense_orbit_build(f, x, eps, horizon)
            except NotWeakDense as exc:
                dense_status = "inconclusive"
                dense_witness = {"point": str(x), "stuck_cell": exc.cell}
                break
    return MinimalityResult(
        Verdict(dense_status, dense_witness, budget),
        Verdict(weak_status, weak_witness, budget))


# -- the finite oracle -------------------------------------------------------


@dataclass(frozen=True)
class FiniteReport:
    """Ground-truth booleans for a finite discrete system.

    A dense orbit here means a walk from the point visiting every state
    infinitely often: on a discrete space a single visit is a boundary
    artifact of isolated points, and the recurring-visit reading is the
    one under which the density notions relate as they do on perfect
    spaces.  Sensitivity uses the discrete metric, under which arbitrarily
    close distinct points do not exist, so only the branchwise notion can
    ever hold.
    """

    transitive: bool
    dense_orbit: dict[str, bool]
    weak_dense_orbit: dict[str, bool]
    dense_minimal: bool
    weak_dense_minimal: bool
    strongly_sensitive: bool
    sensitive: bool
    weakly_sensitive: bool
    recurrent_separation_sensitive: bool


ORACLE_STATE_BOUND = 12


def finite_oracle(s: FiniteSystem) -> FiniteReport:
    n = len(s.states)
    if n > ORACLE_STATE_BOUND:
        raise TooLarge(f"{n} states exceeds the oracle bound {ORACLE_STATE_BOUND}")

    index = {st: i for i, st in enumerate(s.states)}
    succ = [frozenset(index[t] for t in s.successors(st)) for st in s.states]

    # reachability closure of the iterated relation (>= 1 step)
    reach: list[set[int]] = []
    for i in range(n):
        seen: set[int] = set()
        frontier = list(succ[i])
        while frontier:
            j = frontier.pop()
            if j not in seen:
                seen.add(j)
                frontier.extend(succ[j])
        reach.append(seen)

    transitive = all(len(reach[i]) == n for i in range(n))
    weak = {st: len(reach[i]) == n for i, st in enumerate(s.states)}

    # dense orbit: a covering walk exists from every state exactly when
    # some walk visits all states infinitely often; decided by memoized
    # covering-walk search, independently of the reachability closure.
    covering = all(_covering_walk_exists(succ, i, n) for i in range(n))
    dense = {st: covering for st in s.states}

    weakly_sensitive = _weakly_sensitive(s)

    return FiniteReport(
        transitive=transitive,
        dense_orbit=dense,
        weak_dense_orbit=weak,
        dense_minimal=all(dense.values()),
        weak_dense_minimal=all(weak.values()),
        strongly_sensitive=False,
        sensitive=False,
        weakly_sensitive=weakly_sensitive,
        recurrent_separation_sensitive=False,
    )


def _covering_walk_exists(succ: Sequence[frozenset[int]], start: int,
                          n: int) -> bool:
    """Brute-force search with memoization for a walk covering all states."""
    full = (1 << n) - 1
    seen: set[tuple[int, int]] = set()
    stack = [(start, 1 << start)]
    while stack:
        state, mask = stack.pop()
        if mask == full:
            return True
        if (state, mask) in seen:
            continue
        seen.add((state, mask))
        for t in succ[state]:
            stack.append((t, mask | (1 << t)))
    return False


def _weakly_sensitive(s: FiniteSystem) -> bool:
    """Every state eventually has a branching iterate (two orbit threads
    through the same start can then be one apart in the discrete metric)."""
    for st in s.states:
        current = frozenset({st})
        seen = {current}
        branched = len(current) > 1
        while not branched:
            current = frozenset(t for u in current for t in s.successors(u))
            if len(current) > 1:
                branched = True
                break
            if current in seen:
                break
            seen.add(current)
        if not branched:
            return False
    return True
