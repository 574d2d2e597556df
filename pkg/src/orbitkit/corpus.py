"""Catalog of the built-in example systems, with checkable expectations.

Irrational ingredients (dense-orbit points) are replaced by documented
rational stand-ins, chosen so that the finite-horizon behaviour used in
checks is realized: the marker point of `tent_aug_G` has a tent orbit
that is 1/8-dense within 9 steps and 1/16-dense within 26, and the two
half-interval points wired into `double_tent_F` each sweep the four
cells of their half at resolution 1/8 before landing on the opposite
switch point.  Every expectation involving a stand-in is therefore
horizon-qualified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .setmap import (
    FiniteSystem,
    SetValuedMap,
    finite_system,
    make_map,
    point_rule,
    preimage_union_map,
    rectangle,
    segment,
)
from .space import Q, as_q, interval, parse_set, point


class UnknownName(ValueError):
    pass


class BadParams(ValueError):
    pass


# rational stand-ins for the classically irrational ingredients
T0_DEFAULT = Q(3, 59)        # tent orbit: 1/8-dense by step 9
S_RIGHT_DEFAULT = Q(29, 48)  # sweeps [1/2,1] cells, then lands on 5/6
T_LEFT_DEFAULT = Q(1, 24)    # sweeps [0,1/2] cells, then lands on 1/6


@dataclass(frozen=True)
class Expectation:
    """One executable check: an operation name, arguments, expected value."""

    op: str
    args: tuple
    expected: object
    note: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict
    obj: Union[SetValuedMap, FiniteSystem]
    expectations: tuple[Expectation, ...] = ()


def _tent_pieces():
    return [segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0)]


def _double_tent_pieces():
    return [
        segment(0, "1/4", "1/2", 0),
        segment("1/4", "3/4", 0, 1),
        segment("3/4", 1, 1, "1/2"),
    ]


def _devil_segments(level: int):
    """Plateau-and-rise polyline at the given construction level.

    The exact staircase is not finitely piecewise; this is the standard
    level-`level` approximation, and its level is part of the name
    whenever it is reported.
    """
    pieces = []

    def build(a: Q, b: Q, ya: Q, yb: Q, depth: int) -> None:
        if depth == level:
            pieces.append(segment(a, b, ya, yb))
            return
        third = (b - a) / 3
        mid = (ya + yb) / 2
        build(a, a + third, ya, mid, depth + 1)
        pieces.append(segment(a + third, b - third, mid, mid))
        build(b - third, b, mid, yb, depth + 1)

    build(Q(0), Q(1), Q(0), Q(1), 0)
    return pieces


def _builtin_tent(params) -> CatalogEntry:
    obj = make_map(_tent_pieces(), name="tent", values_connected=True)
    return CatalogEntry("tent", {}, obj, (
        Expectation("evaluate", ("1/2",), "{1}"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), True),
        Expectation("preimage", ("2/3",), "{1/3}|{2/3}"),
    ))


def _builtin_identity(params) -> CatalogEntry:
    obj = make_map([segment(0, 1, 0, 1)], name="identity",
                   values_connected=True)
    return CatalogEntry("identity", {}, obj, (
        Expectation("evaluate", ("1/3",), "{1/3}"),
        Expectation("usc", (), True),
        Expectation("lsc", (), True),
    ))


def _builtin_double_tent_h(params) -> CatalogEntry:
    obj = make_map(_double_tent_pieces(), name="double_tent_h",
                   values_connected=True)
    return CatalogEntry("double_tent_h", {}, obj, (
        Expectation("evaluate", ("1/4",), "{0}"),
        Expectation("evaluate", ("1/6",), "{1/6}"),
        Expectation("evaluate", ("5/6",), "{5/6}"),
        Expectation("usc", (), True),
        Expectation("preimage", ("0",), "{1/4}"),
    ))


def _builtin_double_tent_F(params) -> CatalogEntry:
    s = as_q(params.get("s", S_RIGHT_DEFAULT))
    t = as_q(params.get("t", T_LEFT_DEFAULT))
    if not Q(1, 2) <= s <= 1:
        raise BadParams("s must lie in [1/2, 1]")
    if not 0 <= t <= Q(1, 2):
        raise BadParams("t must lie in [0, 1/2]")
    pieces = _double_tent_pieces() + [
        point_rule("1/6", parse_set(f"{{1/6}}|{{{s}}}")),
        point_rule("5/6", parse_set(f"{{5/6}}|{{{t}}}")),
    ]
    obj = make_map(pieces, name="double_tent_F")
    return CatalogEntry("double_tent_F", {"s": s, "t": t}, obj, (
        Expectation("evaluate", ("1/6",), f"{{1/6}}|{{{s}}}"),
        Expectation("evaluate", ("5/6",), f"{{{t}}}|{{5/6}}"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), False),
    ))


def _builtin_flip(params) -> CatalogEntry:
    obj = make_map([segment(0, 1, 0, 1), segment(0, 1, 1, 0)], name="flip",
                   values_connected=False)
    return CatalogEntry("flip", {}, obj, (
        Expectation("evaluate", ("3/10",), "{3/10}|{7/10}"),
        Expectation("evaluate", ("1/2",), "{1/2}"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), False),
    ))


def _builtin_devil_pair(params) -> CatalogEntry:
    level = int(params.get("level", 6))
    if not 1 <= level <= 10:
        raise BadParams("level must be between 1 and 10")
    pieces = _devil_segments(level) + [segment(0, 1, 0, 1)]
    obj = make_map(pieces, name=f"devil_pair(level={level})")
    return CatalogEntry("devil_pair", {"level": level}, obj, (
        Expectation("evaluate", ("1/2",), "{1/2}"),
        Expectation("evaluate", ("0",), "{0}"),
        Expectation("evaluate", ("1",), "{1}"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), False),
    ))


def _builtin_fan0(params) -> CatalogEntry:
    obj = make_map([segment(0, 1, 0, 1), point_rule(0, interval(0, 1))],
                   name="fan0", values_connected=True)
    return CatalogEntry("fan0", {}, obj, (
        Expectation("evaluate", ("0",), "[0,1]"),
        Expectation("evaluate", ("2/3",), "{2/3}"),
        Expectation("usc", (), True),
        Expectation("lsc", (), False),
        Expectation("values_connected", (), True),
    ))


def _builtin_fan01(params) -> CatalogEntry:
    obj = make_map(
        [segment(0, 1, 0, 1), point_rule(0, interval(0, 1)),
         point_rule(1, interval(0, 1))],
        name="fan01", values_connected=True)
    return CatalogEntry("fan01", {}, obj, (
        Expectation("evaluate", ("0",), "[0,1]"),
        Expectation("evaluate", ("1",), "[0,1]"),
        Expectation("evaluate", ("1/3",), "{1/3}"),
        Expectation("usc", (), True),
    ))


def _builtin_pin(params) -> CatalogEntry:
    r = as_q(params.get("r", Q(1, 2)))
    if not 0 <= r <= 1:
        raise BadParams("r must lie in [0, 1]")
    obj = make_map(
        [rectangle(0, 1, point(r)), point_rule(r, interval(0, 1))],
        name=f"pin(r={r})", values_connected=True)
    return CatalogEntry("pin", {"r": r}, obj, (
        Expectation("evaluate", ("1/5",) if r != Q(1, 5) else ("2/5",),
                    f"{{{r}}}"),
        Expectation("evaluate", (str(r),), "[0,1]"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), True),
    ))


def _builtin_tent_aug_F(params) -> CatalogEntry:
    obj = make_map(_tent_pieces() + [point_rule(0, interval(0, 1))],
                   name="tent_aug_F")
    return CatalogEntry("tent_aug_F", {}, obj, (
        Expectation("evaluate", ("0",), "[0,1]"),
        Expectation("evaluate", ("1/2",), "{1}"),
        Expectation("iterate", ("0", 2), "[0,1]"),
        Expectation("usc", (), True),
    ))


def _builtin_tent_aug_G(params) -> CatalogEntry:
    t0 = as_q(params.get("t0", T0_DEFAULT))
    if not 0 <= t0 <= 1:
        raise BadParams("t0 must lie in [0, 1]")
    obj = make_map(_tent_pieces() + [rectangle(0, 1, point(t0))],
                   name=f"tent_aug_G(t0={t0})")
    return CatalogEntry("tent_aug_G", {"t0": t0}, obj, (
        Expectation("evaluate", ("1/2",), f"{{{t0}}}|{{1}}"),
        Expectation("usc", (), True),
        Expectation("values_connected", (), False),
    ))


def _builtin_slide(params) -> CatalogEntry:
    obj = make_map([segment(0, 1, 0, 1), point_rule(1, interval(0, 1))],
                   name="slide", values_connected=True)
    return CatalogEntry("slide", {}, obj, (
        Expectation("evaluate", ("1",), "[0,1]"),
        Expectation("evaluate", ("3/10",), "{3/10}"),
        Expectation("usc", (), True),
    ))


def _builtin_ramp(params) -> CatalogEntry:
    obj = make_map(
        [
            point_rule(0, interval("1/2", 1)),
            segment(0, "1/4", "1/2", 0),
            segment("1/4", "1/2", 0, "1/2"),
            segment("1/2", 1, "1/2", 1),
        ],
        name="ramp", values_connected=True)
    return CatalogEntry("ramp", {}, obj, (
        Expectation("evaluate", ("0",), "[1/2,1]"),
        Expectation("evaluate", ("3/4",), "{3/4}"),
        Expectation("usc", (), True),
    ))


def _builtin_preimage_union(params) -> CatalogEntry:
    names = params.get("maps", ("tent", "identity"))
    if isinstance(names, str):
        names = tuple(n.strip() for n in names.split("+"))
    sources = []
    for n in names:
        entry = builtin(n)
        if not isinstance(entry.obj, SetValuedMap):
            raise BadParams(f"{n} is not an interval map")
        sources.append(entry.obj)
    obj = preimage_union_map(sources, name="preimage_union(%s)" % "+".join(names))
    return CatalogEntry("preimage_union", {"maps": tuple(names)}, obj, (
        Expectation("usc", (), True),
    ))


def _builtin_finite_seq(params) -> CatalogEntry:
    n = int(params.get("n", 6))
    if n < 2:
        raise BadParams("n must be at least 2")
    # discrete stand-in for a convergent sequence with its limit: the
    # head state fans out onto everything else, the rest stay put
    states = [f"x{i}" for i in range(1, n)] + ["limit"]
    table = {s: [s] for s in states}
    table["x1"] = [s for s in states if s != "x1"]
    obj = finite_system(table, states=states)
    return CatalogEntry("finite_seq", {"n": n}, obj, ())


def _builtin_finite_cycle(params) -> CatalogEntry:
    n = int(params.get("n", 3))
    if n < 1:
        raise BadParams("n must be positive")
    states = [f"c{i}" for i in range(n)]
    table = {states[i]: [states[(i + 1) % n]] for i in range(n)}
    obj = finite_system(table, states=states)
    return CatalogEntry("finite_cycle", {"n": n}, obj, ())


CATALOG: dict[str, Callable[[dict], CatalogEntry]] = {
    "tent": _builtin_tent,
    "identity": _builtin_identity,
    "double_tent_h": _builtin_double_tent_h,
    "double_tent_F": _builtin_double_tent_F,
    "flip": _builtin_flip,
    "devil_pair": _builtin_devil_pair,
    "fan0": _builtin_fan0,
    "fan01": _builtin_fan01,
    "pin": _builtin_pin,
    "tent_aug_F": _builtin_tent_aug_F,
    "tent_aug_G": _builtin_tent_aug_G,
    "slide": _builtin_slide,
    "ramp": _builtin_ramp,
    "preimage_union": _builtin_preimage_union,
    "finite_seq": _builtin_finite_seq,
    "finite_cycle": _builtin_finite_cycle,
}

PARAM_DOC: dict[str, dict[str, str]] = {
    "double_tent_F": {"s": "right switch target in [1/2,1]",
                      "t": "left switch target in [0,1/2]"},
    "devil_pair": {"level": "construction depth of the staircase (1..10)"},
    "pin": {"r": "the pinned point in [0,1]"},
    "tent_aug_G": {"t0": "marker point carried in every value"},
    "preimage_union": {"maps": "'+'-joined names of single valued onto maps"},
    "finite_seq": {"n": "number of states"},
    "finite_cycle": {"n": "cycle length"},
}


def builtin(name: str, **params) -> CatalogEntry:
    """Construct a catalog system by name; raises UnknownName/BadParams."""
    if name not in CATALOG:
        raise UnknownName(f"no builtin named {name!r}")
    try:
        return CATALOG[name](params)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (UnknownName, BadParams)):
            raise
        raise BadParams(str(exc)) from exc


def list_builtins() -> list[dict]:
    """Machine-readable index: name, parameters, expectation notes."""
    out = []
    for name in sorted(CATALOG):
        entry = CATALOG[name]({})
        out.append({
            "name": name,
            "params": {k: str(v) for k, v in
                       sorted(PARAM_DOC.get(name, {}).items())},
            "defaults": {k: str(v) for k, v in sorted(entry.params.items())},
            "kind": "finite" if isinstance(entry.obj, FiniteSystem) else "interval",
            "expectations": len(entry.expectations),
        })
    return out


def check_expectation(entry: CatalogEntry, exp: Expectation) -> tuple[bool, object]:
    """Execute one expectation; returns (passed, observed)."""
    from .setmap import (
        evaluate, iterate, lsc_check, preimage, usc_check,
        values_connected_check,
    )
    from .space import format_set

    obj = entry.obj
    if exp.op == "evaluate":
        got = format_set(evaluate(obj, as_q(exp.args[0])))
        want = format_set(parse_set(exp.expected))
        return got == want, got
    if exp.op == "iterate":
        got = format_set(iterate(obj, as_q(exp.args[0]), int(exp.args[1])))
        want = format_set(parse_set(exp.expected))
        return got == want, got
    if exp.op == "preimage":
        back = preimage(obj, as_q(exp.args[0]))
        got = format_set(back) if back is not None else None
        want = format_set(parse_set(exp.expected)) if exp.expected else None
        return got == want, got
    if exp.op == "usc":
        got = usc_check(obj).holds
        return got == exp.expected, got
    if exp.op == "lsc":
        got = lsc_check(obj).holds
        return got == exp.expected, got
    if exp.op == "values_connected":
        got, _ = values_connected_check(obj)
        return got == exp.expected, got
    raise ValueError(f"unknown expectation op {exp.op!r}")


def sweep(entry: CatalogEntry) -> list[tuple[Expectation, bool, object]]:
    return [(e, *check_expectation(entry, e)) for e in entry.expectations]
