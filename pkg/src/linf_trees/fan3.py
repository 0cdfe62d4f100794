"""The district decomposition of 3-leaf dissimilarity maps, as data and as SVG.

Points (x12, x13, x23) are taken modulo the line spanned by (1,1,1) and
drawn in the orthonormal frame

    f1 = (1, -1, 0) / sqrt(2),   f2 = (1, 1, -2) / sqrt(6)

with SVG's y axis flipped so that f2 points up.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from . import lp
from .dissim import DissimilarityMap
from .trees import topology_of_ultrametric
from .ultra import closest_pieces, distance_to_ultrametrics, district

SIZE = 480
RADIUS = 200


@dataclass(frozen=True)
class Cone:
    """A cone of the fan: its generators (beyond the lineality (1,1,1)) and district."""

    generators: tuple[tuple[int, int, int], ...]
    label: str

    @property
    def dimension(self) -> int:
        return len(self.generators)

    def representative(self) -> tuple[int, ...]:
        return tuple(sum(g[i] for g in self.generators) for i in range(3))


_UNIT = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def fan3_cones() -> list[Cone]:
    """The seven cones, each labeled by running district() on an interior point."""
    gens = [()] + [(u,) for u in _UNIT] + [pair for pair in itertools.combinations(_UNIT, 2)]
    cones = []
    for g in gens:
        rep = tuple(sum(v[i] for v in g) for i in range(3))
        cones.append(Cone(tuple(g), district(DissimilarityMap.of(rep))))
    return cones


def project(x) -> tuple[float, float]:
    a, b, c = (float(v) for v in x)
    return (a - b) / math.sqrt(2), (a + b - 2 * c) / math.sqrt(6)


def _xy(p, scale: float) -> tuple[float, float]:
    return SIZE / 2 + scale * p[0], SIZE / 2 - scale * p[1]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _points(pts) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


def zonotope(delta: DissimilarityMap, radius) -> list[tuple[float, float]]:
    """Projected l-infinity ball around delta: a hexagon in angular order."""
    c = project(delta.values)
    verts = set()
    for signs in itertools.product((1, -1), repeat=3):
        if len(set(signs)) == 1:
            continue
        q = project([v + s * radius for v, s in zip(delta.values, signs)])
        verts.add((round(q[0], 12), round(q[1], 12)))
    return sorted(verts, key=lambda q: math.atan2(q[1] - c[1], q[0] - c[0]))


def closest_vertices(delta: DissimilarityMap) -> list[tuple]:
    """(topology, extreme closest ultrametrics) for each binary piece of the closest set."""
    out = []
    for t, cons in closest_pieces(delta):
        nodes = t.internal_nodes
        found = []
        for obj in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)):
            res = lp.minimize(len(nodes), cons, obj)
            heights = dict(zip(nodes, res.witness))
            u = DissimilarityMap.from_function(
                delta.labels, lambda a, b: heights[t.lca_table[frozenset((a, b))]])
            if u not in found:
                found.append(u)
        out.append((t, found))
    return out


def render_svg(delta: DissimilarityMap | None = None) -> str:
    cones = fan3_cones()
    scale = RADIUS / 1.0
    overlay = None
    if delta is not None:
        if delta.n != 3:
            raise ValueError(f"the fan overlay needs a 3-leaf map, got {delta.n} leaves")
        r = distance_to_ultrametrics(delta)
        hexagon = zonotope(delta, r)
        pieces = closest_vertices(delta)
        extent = max([math.hypot(*project(delta.values))] + [math.hypot(*q) for q in hexagon])
        scale = 0.8 * RADIUS / extent if extent > 0 else scale
        overlay = (r, hexagon, pieces)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        "<!-- Districts of 3-leaf dissimilarity maps modulo (1,1,1).",
        "     Frame: f1 = (1,-1,0)/sqrt(2) to the right, f2 = (1,1,-2)/sqrt(6) up.",
        "     Coordinates are ordered (x12, x13, x23). -->",
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    far = 1.2 * RADIUS
    rays = {}
    for c in cones:
        if c.dimension == 1:
            d = project(c.generators[0])
            n = math.hypot(*d)
            rays[c.generators[0]] = (d[0] / n, d[1] / n)
    shades = ["#dde8f5", "#e4f2dd", "#f5e6d8"]
    regions = [c for c in cones if c.dimension == 2]
    for shade, c in zip(shades, regions):
        a, b = (rays[g] for g in c.generators)
        mid = (a[0] + b[0], a[1] + b[1])
        m = math.hypot(*mid)
        pts = [(0, 0), (a[0] * far * 2, a[1] * far * 2), (mid[0] / m * far * 4, mid[1] / m * far * 4),
               (b[0] * far * 2, b[1] * far * 2)]
        out.append(f'<polygon points="{_points(_xy(p, 1) for p in pts)}" fill="{shade}" '
                   f'stroke="none"><title>{escape(c.label)}</title></polygon>')
        lx, ly = _xy((mid[0] / m * RADIUS * 0.7, mid[1] / m * RADIUS * 0.7), 1)
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-family="monospace" font-size="13" '
                   f'text-anchor="middle">{escape(c.label)}</text>')
    for c in cones:
        if c.dimension != 1:
            continue
        d = rays[c.generators[0]]
        x1, y1 = _xy((d[0] * far * 2, d[1] * far * 2), 1)
        ox, oy = _xy((0, 0), 1)
        out.append(f'<line x1="{_fmt(ox)}" y1="{_fmt(oy)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                   f'stroke="black" stroke-dasharray="6,4"><title>{escape(c.label)}</title></line>')
        lx, ly = _xy((d[0] * RADIUS * 0.95, d[1] * RADIUS * 0.95), 1)
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly + 14)}" font-family="monospace" font-size="10" '
                   f'text-anchor="middle">{escape(c.label)}</text>')
    origin = next(c for c in cones if c.dimension == 0)
    ox, oy = _xy((0, 0), 1)
    out.append(f'<circle cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="4" fill="black">'
               f'<title>{escape(origin.label)}</title></circle>')
    out.append(f'<text x="{_fmt(ox + 8)}" y="{_fmt(oy - 8)}" font-family="monospace" '
               f'font-size="11">{escape(origin.label)}</text>')

    if overlay is not None:
        r, hexagon, pieces = overlay
        out.append(f'<polygon points="{_points(_xy(q, scale) for q in hexagon)}" fill="none" '
                   f'stroke="#b03030" stroke-width="1.5"><title>zonotope, radius '
                   f'{r}</title></polygon>')
        for t, verts in pieces:
            pts = [_xy(project(u.values), scale) for u in verts]
            if len(pts) > 1:
                out.append(f'<polyline points="{_points(pts)}" fill="none" stroke="#b03030" '
                           f'stroke-width="3"><title>{escape(t.format())}</title></polyline>')
        marked = {}
        for _, verts in pieces:
            for u in verts:
                marked[u.values] = u
        for key in sorted(marked):
            u = marked[key]
            resolved = topology_of_ultrametric(u).topology.is_binary
            x, y = _xy(project(u.values), scale)
            fill = "#b03030" if resolved else "white"
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{fill}" stroke="#b03030">'
                       f'<title>{u}</title></circle>')
        x, y = _xy(project(delta.values), scale)
        out.append(f'<rect x="{_fmt(x - 3)}" y="{_fmt(y - 3)}" width="6" height="6" fill="black">'
                   f'<title>{delta}</title></rect>')
        out.append(f'<text x="{_fmt(x + 6)}" y="{_fmt(y - 6)}" font-family="monospace" '
                   f'font-size="11">{escape(str(delta))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
