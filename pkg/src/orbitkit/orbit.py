"""Exact orbit trees and sound grid covers of truncated orbit sets.

For maps whose values along the way are finite point sets, the full tree
of orbit prefixes is built exactly.  For everything else a cover at
resolution 1/m records, per prefix position, which grid cells the orbit
can be in; the cover is always an over-approximation (outer = true) and
so is sound for refutations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .setmap import SetValuedMap, evaluate, image, iterate, values_connected_check
from .space import (
    Q,
    SeqPrefix,
    as_q,
    canonicalize,
    cell_interval,
    cells_meeting,
    grid_size,
    rho_prefix,
)

NODE_BUDGET = 1_000_000


class OrbitError(ValueError):
    """Base class for orbit construction errors."""


class NotFiniteValued(OrbitError):
    """Some reachable value has an interval component."""

    def __init__(self, at: Q):
        super().__init__(f"value at {at} has an interval component")
        self.at = at


class BudgetExceeded(OrbitError):
    """A tree or cover outgrew the node budget."""


class IndexOutOfRange(OrbitError):
    """Projection index outside 1..depth."""


class NoSibling(OrbitError):
    """Every admissible split point has a degenerate value."""


class HypothesisNotChecked(OrbitError):
    """A check was invoked whose hypothesis is not established."""


@dataclass(frozen=True)
class OrbitNode:
    value: Q
    children: tuple["OrbitNode", ...]


@dataclass(frozen=True)
class OrbitTree:
    """All orbit prefixes of a fixed length from one starting point.

    Level 1 holds the root; children of a node enumerate the map value
    at the node exactly, sorted ascending.
    """

    map: SetValuedMap
    root: OrbitNode
    depth: int

    def branches(self) -> Iterator[SeqPrefix]:
        stack: list[tuple[OrbitNode, tuple[Q, ...]]] = [(self.root, (self.root.value,))]
        while stack:
            node, prefix = stack.pop()
            if not node.children:
                yield prefix
            else:
                for child in reversed(node.children):
                    stack.append((child, prefix + (child.value,)))

    def level_values(self, k: int) -> tuple[Q, ...]:
        if not 1 <= k <= self.depth:
            raise IndexOutOfRange(f"k={k} outside 1..{self.depth}")
        level = [self.root]
        for _ in range(k - 1):
            level = [c for node in level for c in node.children]
        return tuple(sorted({n.value for n in level}))


def orbit_tree(f: SetValuedMap, z, n: int) -> OrbitTree:
    """The exact tree of orbit prefixes of length n starting at z."""
    z = as_q(z)
    if n < 1:
        raise OrbitError("depth must be at least 1")
    count = 0

    def expand(value: Q, remaining: int) -> OrbitNode:
        nonlocal count
        count += 1
        if count > NODE_BUDGET:
            raise BudgetExceeded(f"orbit tree exceeds {NODE_BUDGET} nodes")
        if remaining == 0:
            return OrbitNode(value, ())
        succ = evaluate(f, value)
        if not succ.is_finite():
            raise NotFiniteValued(value)
        return OrbitNode(
            value, tuple(expand(y, remaining - 1) for y in succ.points()))

    return OrbitTree(f, expand(z, n - 1), n)


@dataclass(frozen=True)
class OrbitCover:
    """Grid cells the first n orbit entries can visit, path by path.

    Soundness: every exact orbit prefix of length n from z threads some
    recorded path (entry i inside cell path[i-1]).  ``outer`` is always
    true; covers never certify membership, only exclusion.
    """

    map: SetValuedMap
    z: Q
    eps: Q
    depth: int
    paths: tuple[tuple[int, ...], ...]
    outer: bool = True

    @property
    def cells(self) -> int:
        return grid_size(self.eps)

    def level_cells(self, k: int) -> tuple[int, ...]:
        if not 1 <= k <= self.depth:
            raise IndexOutOfRange(f"k={k} outside 1..{self.depth}")
        return tuple(sorted({p[k - 1] for p in self.paths}))


def orbit_cover(f: SetValuedMap, z, n: int, eps) -> OrbitCover:
    """Walks of the cell transition relation that over-approximate orbits.

    Step one is the cell (or boundary cells) of z; step two is refined by
    the exact value at z; later steps follow cell-image successors.
    """
    z, eps = as_q(z), as_q(eps)
    m = grid_size(eps)
    if n < 1:
        raise OrbitError("depth must be at least 1")
    succ_cache: dict[int, tuple[int, ...]] = {}

    def successors(c: int) -> tuple[int, ...]:
        if c not in succ_cache:
            succ_cache[c] = cells_meeting(image(f, cell_interval(c, m)), m)
        return succ_cache[c]

    paths = [(c,) for c in cells_meeting(canonicalize([z]), m)]
    if n >= 2:
        step2 = cells_meeting(evaluate(f, z), m)
        paths = [p + (c,) for p in paths for c in step2]
    for _ in range(3, n + 1):
        grown = []
        for p in paths:
            for c in successors(p[-1]):
                grown.append(p + (c,))
                if len(grown) > NODE_BUDGET:
                    raise BudgetExceeded("orbit cover exceeds the node budget")
        paths = grown
    return OrbitCover(f, z, eps, n, tuple(sorted(paths)))


def project_k(t: Union[OrbitTree, OrbitCover], k: int):
    """Entries reachable at position k.

    For a tree this is the exact level set (a finite closed set equal to
    the (k-1)-th iterate of the start); for a cover it is the tuple of
    level-k cell indices, which covers that iterate.
    """
    if isinstance(t, OrbitTree):
        return canonicalize(t.level_values(k))
    return t.level_cells(k)


def sibling_within(t: OrbitTree, branch: Sequence[Q], eps) -> SeqPrefix:
    """A distinct branch within metric distance eps of the given branch.

    Splits at the earliest admissible position after N, where N is the
    least index with 2^-N < eps; agreement through N bounds the metric
    gap (partial sum plus tail) below eps.
    """
    eps = as_q(eps)
    if eps <= 0:
        raise OrbitError("eps must be positive")
    branch = tuple(as_q(b) for b in branch)
    if len(branch) != t.depth:
        raise OrbitError("branch length must equal the tree depth")
    n_agree = 0
    while Q(1, 2**n_agree) >= eps:
        n_agree += 1
    n_agree = max(1, n_agree)
    if n_agree >= t.depth:
        raise NoSibling(
            f"needs agreement through index {n_agree} but depth is {t.depth}")

    # walk down the branch, remembering nodes
    nodes = [t.root]
    if t.root.value != branch[0]:
        raise OrbitError("branch does not start at the tree root")
    for i, want in enumerate(branch[1:], start=1):
        nxt = next((c for c in nodes[-1].children if c.value == want), None)
        if nxt is None:
            raise OrbitError(f"branch leaves the tree at index {i + 1}")
        nodes.append(nxt)

    for split in range(n_agree, t.depth):
        _ = nodes[split]  # keep indexably honest: split position exists
        parent = nodes[split - 1]
        taken = branch[split]
        others = [c for c in parent.children if c.value != taken]
        if not others:
            continue
        child = others[0]
        tail: list[Q] = [child.value]
        node = child
        while len(tail) + split < t.depth:
            node = node.children[0]
            tail.append(node.value)
        sibling = branch[:split] + tuple(tail)
        value, tail_bound = rho_prefix(branch, sibling, t.depth)
        assert value + tail_bound < eps
        return sibling
    raise NoSibling("every admissible split point has a single child")


@dataclass(frozen=True)
class ConnectivityVerdict:
    connected: bool
    disconnecting_level: Optional[int] = None


def depth_connectivity(cover: OrbitCover) -> ConnectivityVerdict:
    """Connectivity of the cover's tube union, level by level.

    Two paths are adjacent when their cells at every level coincide or
    share an endpoint; the union of the corresponding product tubes is
    connected exactly when this adjacency graph is.  Requires the map's
    values to be connected (the hypothesis under which the exact object
    is known to be connected).
    """
    ok, _ = values_connected_check(cover.map)
    if not ok:
        raise HypothesisNotChecked("map values are not all connected")
    for level in range(1, cover.depth + 1):
        prefixes = sorted({p[:level] for p in cover.paths})
        if len(prefixes) <= 1:
            continue
        index = {p: i for i, p in enumerate(prefixes)}
        parent = list(range(len(prefixes)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, p in enumerate(prefixes):
            for j in range(i + 1, len(prefixes)):
                q = prefixes[j]
                if all(abs(a - b) <= 1 for a, b in zip(p, q)):
                    ri, rj = find(i), find(index[q])
                    if ri != rj:
                        parent[ri] = rj
        roots = {find(i) for i in range(len(prefixes))}
        if len(roots) > 1:
            return ConnectivityVerdict(False, level)
    return ConnectivityVerdict(True)


def to_json(t: Union[OrbitTree, OrbitCover]) -> str:
    """Structured text export with explicit branch or path lists."""
    import json

    if isinstance(t, OrbitTree):
        payload = {
            "kind": "tree",
            "map": t.map.name,
            "root": str(t.root.value),
            "depth": t.depth,
            "branches": [[str(x) for x in b] for b in t.branches()],
        }
    else:
        payload = {
            "kind": "cover",
            "map": t.map.name,
            "start": str(t.z),
            "eps": str(t.eps),
            "depth": t.depth,
            "outer": t.outer,
            "paths": [list(p) for p in t.paths],
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def inverse_limit_prefixes(
    fs: Sequence[SetValuedMap], z, n: int
) -> frozenset[SeqPrefix]:
    """Depth-n prefixes of inverse limit threads over all branch labels.

    For single valued maps f_1..f_k, enumerates every (x_1..x_n) with
    x_1 = z and x_i = f_{p_i}(x_{i+1}) for some label word p, by solving
    the affine pieces of each f backwards.  Independent of the forward
    tree expansion, so the two can be compared.
    """
    from .setmap import preimage

    z = as_q(z)
    prefixes: set[SeqPrefix] = {(z,)}
    for _ in range(n - 1):
        grown: set[SeqPrefix] = set()
        for pre in prefixes:
            for f in fs:
                back = preimage(f, pre[-1])
                if back is None:
                    continue
                if not back.is_finite():
                    raise NotFiniteValued(pre[-1])
                for x in back.points():
                    grown.add(pre + (x,))
        prefixes = grown
    return frozenset(prefixes)
