"""Deterministic SVG rendering of maps, orbit structures and graphs.

Geometry is computed in exact rationals; numbers are rounded to twelve
significant digits only when written into the document.  Identical
inputs therefore produce byte-identical SVG.
"""

from __future__ import annotations

from decimal import Context, Decimal
from typing import Union

from .analysis import TransitionGraph
from .orbit import OrbitCover, OrbitTree
from .setmap import Band, PointRule, Rectangle, Segment, SetValuedMap
from .space import Q

MARGIN = Q(40)
SIDE = Q(480)
CANVAS = MARGIN * 2 + SIDE
ELEMENT_BUDGET = 100_000


class TooLarge(ValueError):
    """The object would need more drawing elements than the budget."""


_CTX = Context(prec=12)


def fmt(q: Q) -> str:
    """Twelve-significant-digit decimal text for an exact rational."""
    d = _CTX.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d.normalize(_CTX), "f")


def _sx(x: Q) -> str:
    return fmt(MARGIN + x * SIDE)


def _sy(y: Q) -> str:
    return fmt(MARGIN + (1 - y) * SIDE)


def _document(body: list[str], title: str) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(CANVAS)}" '
        f'height="{fmt(CANVAS)}" viewBox="0 0 {fmt(CANVAS)} {fmt(CANVAS)}">',
        f'<title>{title}</title>',
        f'<rect x="{fmt(MARGIN)}" y="{fmt(MARGIN)}" width="{fmt(SIDE)}" '
        f'height="{fmt(SIDE)}" fill="none" stroke="#888" stroke-width="1"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _check_budget(count: int) -> None:
    if count > ELEMENT_BUDGET:
        raise TooLarge(f"{count} drawing elements exceed {ELEMENT_BUDGET}")


def render_map(f: SetValuedMap) -> str:
    """The graph of the map inside the unit square."""
    body: list[str] = []
    count = 0
    for p in f.pieces:
        if isinstance(p, Segment):
            x0, x1 = p.domain.lo, p.domain.hi
            body.append(
                f'<line x1="{_sx(x0)}" y1="{_sy(p.value_at(x0))}" '
                f'x2="{_sx(x1)}" y2="{_sy(p.value_at(x1))}" '
                'stroke="#1f4e9c" stroke-width="2"/>')
            count += 1
        elif isinstance(p, Rectangle):
            for lo, hi in p.value.components:
                if lo == hi:
                    body.append(
                        f'<line x1="{_sx(p.domain.lo)}" y1="{_sy(lo)}" '
                        f'x2="{_sx(p.domain.hi)}" y2="{_sy(lo)}" '
                        'stroke="#1f9c4e" stroke-width="2"/>')
                else:
                    width = (p.domain.hi - p.domain.lo) * SIDE
                    body.append(
                        f'<rect x="{_sx(p.domain.lo)}" y="{_sy(hi)}" '
                        f'width="{fmt(width)}" height="{fmt((hi - lo) * SIDE)}" '
                        'fill="#1f9c4e" fill-opacity="0.35"/>')
                count += 1
        elif isinstance(p, PointRule):
            for lo, hi in p.value.components:
                if lo == hi:
                    body.append(
                        f'<circle cx="{_sx(p.at)}" cy="{_sy(lo)}" r="3" '
                        'fill="#9c1f1f"/>')
                else:
                    body.append(
                        f'<line x1="{_sx(p.at)}" y1="{_sy(lo)}" '
                        f'x2="{_sx(p.at)}" y2="{_sy(hi)}" '
                        'stroke="#9c1f1f" stroke-width="2"/>')
                count += 1
        elif isinstance(p, Band):
            pts = [
                (p.domain.lo, p.lower_at(p.domain.lo)),
                (p.domain.hi, p.lower_at(p.domain.hi)),
                (p.domain.hi, p.upper_at(p.domain.hi)),
                (p.domain.lo, p.upper_at(p.domain.lo)),
            ]
            path = " ".join(f"{_sx(x)},{_sy(y)}" for x, y in pts)
            body.append(
                f'<polygon points="{path}" fill="#9c7a1f" '
                'fill-opacity="0.35"/>')
            count += 1
        _check_budget(count)
    return _document(body, f"graph of {f.name or 'map'}")


def render_tree(t: OrbitTree) -> str:
    """Levels left to right; the vertical coordinate is the point itself."""
    body: list[str] = []
    count = 0
    span = Q(max(1, t.depth - 1))

    def xpos(level: int) -> Q:
        return Q(level - 1, 1) / span if t.depth > 1 else Q(0)

    def walk(node, level):
        nonlocal count
        for child in node.children:
            body.append(
                f'<line x1="{_sx(xpos(level))}" y1="{_sy(node.value)}" '
                f'x2="{_sx(xpos(level + 1))}" y2="{_sy(child.value)}" '
                'stroke="#555" stroke-width="1"/>')
            count += 1
            walk(child, level + 1)
        body.append(
            f'<circle cx="{_sx(xpos(level))}" cy="{_sy(node.value)}" '
            'r="2.5" fill="#1f4e9c"/>')
        count += 1
        _check_budget(count)

    walk(t.root, 1)
    return _document(body, f"orbit tree from {t.root.value} depth {t.depth}")


def render_cover(c: OrbitCover) -> str:
    """Cells visited per level, plus path polylines when few paths."""
    body: list[str] = []
    count = 0
    m = c.cells
    span = Q(max(1, c.depth - 1))

    def xpos(level: int) -> Q:
        return Q(level - 1, 1) / span if c.depth > 1 else Q(0)

    col_w = Q(1, 2) / span if c.depth > 1 else Q(1, 2)
    for level in range(1, c.depth + 1):
        for cell in c.level_cells(level):
            lo, hi = Q(cell, m), Q(cell + 1, m)
            body.append(
                f'<rect x="{_sx(xpos(level) - col_w / 2)}" y="{_sy(hi)}" '
                f'width="{fmt(col_w * SIDE)}" '
                f'height="{fmt((hi - lo) * SIDE)}" fill="#1f4e9c" '
                'fill-opacity="0.25"/>')
            count += 1
    if len(c.paths) <= 256:
        for p in c.paths:
            pts = " ".join(
                f"{_sx(xpos(i + 1))},{_sy(Q(2 * cell + 1, 2 * m))}"
                for i, cell in enumerate(p))
            body.append(
                f'<polyline points="{pts}" fill="none" stroke="#9c1f1f" '
                'stroke-width="1" stroke-opacity="0.6"/>')
            count += 1
    _check_budget(count)
    return _document(
        body, f"orbit cover from {c.z} depth {c.depth} eps {c.eps}")


def render_transition(g: TransitionGraph) -> str:
    """Cells on the baseline, edges as arcs above it, self-loops as lobes."""
    body: list[str] = []
    count = 0
    m = g.cells
    base = Q(1, 10)

    def mid(cell: int) -> Q:
        return Q(2 * cell + 1, 2 * m)

    for c in range(m):
        body.append(
            f'<line x1="{_sx(Q(c, m))}" y1="{_sy(base)}" '
            f'x2="{_sx(Q(c + 1, m))}" y2="{_sy(base)}" '
            'stroke="#888" stroke-width="1"/>')
        body.append(
            f'<circle cx="{_sx(mid(c))}" cy="{_sy(base)}" r="4" '
            'fill="#1f4e9c"/>')
        count += 2
    for c in range(m):
        for d in g.succ[c]:
            if c == d:
                r = Q(1, 4 * m)
                body.append(
                    f'<circle cx="{_sx(mid(c))}" cy="{_sy(base + r)}" '
                    f'r="{fmt(r * SIDE)}" fill="none" stroke="#9c1f1f" '
                    'stroke-width="1"/>')
            else:
                x0, x1 = mid(c), mid(d)
                lift = base + abs(x1 - x0) * Q(2, 3)
                ctrl = (x0 + x1) / 2
                body.append(
                    f'<path d="M {_sx(x0)} {_sy(base)} Q {_sx(ctrl)} '
                    f'{_sy(lift)} {_sx(x1)} {_sy(base)}" fill="none" '
                    'stroke="#9c1f1f" stroke-width="1"/>')
                body.append(
                    f'<circle cx="{_sx(x1 + (x0 - x1) / 16)}" '
                    f'cy="{_sy(base + abs(x1 - x0) / 8)}" r="2" '
                    'fill="#9c1f1f"/>')
                count += 1
            count += 1
        _check_budget(count)
    return _document(body, f"transition graph at eps {g.eps}")


Renderable = Union[SetValuedMap, OrbitTree, OrbitCover, TransitionGraph]


def render(obj: Renderable) -> str:
    """Dispatch to the renderer for the object's type."""
    if isinstance(obj, SetValuedMap):
        return render_map(obj)
    if isinstance(obj, OrbitTree):
        return render_tree(obj)
    if isinstance(obj, OrbitCover):
        return render_cover(obj)
    if isinstance(obj, TransitionGraph):
        return render_transition(obj)
    raise TypeError(f"cannot render {type(obj).__name__}")
