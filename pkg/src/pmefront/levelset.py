"""Level-set extraction from cell-centered fields and signed distances.

On a line or radial grid the level set is a list of crossing abscissae.
On a rectangle it is a set of polylines built by marching squares over the
lattice of cell centers; ambiguous (saddle) cells are resolved by comparing
the average of the four corner values with the level.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .pde import Field, Grid


class DomainError(ValueError):
    pass


@dataclass
class InterfaceCurve:
    """Level set of a field.

    ``points``: for line/radial grids a 1-D array of positions (radii);
    for rectangles a list of (k, 2) polylines, closed ones repeating their
    first vertex at the end.
    """

    geometry: str
    points: object
    time: float = 0.0
    level: float = 0.5

    def is_empty(self) -> bool:
        if self.geometry == "rectangle":
            return len(self.points) == 0
        return np.size(self.points) == 0

    def vertices(self) -> np.ndarray:
        if self.geometry == "rectangle":
            if not self.points:
                return np.empty((0, 2))
            return np.vstack(self.points)
        return np.asarray(self.points, dtype=float).reshape(-1)

    def segments(self) -> np.ndarray:
        """(n, 2, 2) array of polyline segments (rectangle only)."""
        segs = [np.stack([p[:-1], p[1:]], axis=1) for p in self.points if len(p) > 1]
        return np.concatenate(segs) if segs else np.empty((0, 2, 2))


def _crossings_1d(x, u, level):
    above = u > level
    idx = np.nonzero(above[:-1] != above[1:])[0]
    t = (level - u[idx]) / (u[idx + 1] - u[idx])
    return x[idx] + t * (x[idx + 1] - x[idx])


# corner order: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edges: 0 bottom, 1 right, 2 top, 3 left
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))


def _edge_key(i, j, e):
    return (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))[e]


def _marching_squares(xc, yc, u, level):
    above = u > level
    a00, a10 = above[:-1, :-1], above[1:, :-1]
    a11, a01 = above[1:, 1:], above[:-1, 1:]
    mixed = ~((a00 == a10) & (a10 == a11) & (a11 == a01))
    points = {}

    def point(key):
        if key not in points:
            kind, i, j = key
            if kind == "h":
                p, q = (i, j), (i + 1, j)
            else:
                p, q = (i, j), (i, j + 1)
            up, uq = u[p], u[q]
            t = (level - up) / (uq - up)
            points[key] = np.array([xc[p[0]] + t * (xc[q[0]] - xc[p[0]]),
                                    yc[p[1]] + t * (yc[q[1]] - yc[p[1]])])
        return key

    links = defaultdict(list)
    for i, j in zip(*np.nonzero(mixed)):
        corners = (above[i, j], above[i + 1, j], above[i + 1, j + 1], above[i, j + 1])
        crossing = [e for e, (c0, c1) in enumerate(((0, 1), (1, 2), (3, 2), (0, 3)))
                    if corners[c0] != corners[c1]]
        if len(crossing) == 2:
            pairs = [tuple(crossing)]
        else:
            centre = np.mean([u[i, j], u[i + 1, j], u[i + 1, j + 1], u[i, j + 1]]) > level
            pairs = [_CORNER_EDGES[c] for c in range(4) if corners[c] != centre]
        for e0, e1 in pairs:
            k0, k1 = point(_edge_key(i, j, e0)), point(_edge_key(i, j, e1))
            links[k0].append(k1)
            links[k1].append(k0)

    polylines, seen = [], set()

    def walk(start):
        chain = [start]
        seen.add(start)
        cur = start
        while True:
            nxt = [k for k in links[cur] if k not in seen]
            if not nxt:
                if len(chain) > 2 and start in links[cur]:
                    chain.append(start)
                return chain
            cur = nxt[0]
            seen.add(cur)
            chain.append(cur)

    for key in [k for k, v in links.items() if len(v) == 1]:
        if key not in seen:
            polylines.append(walk(key))
    for key in links:
        if key not in seen:
            polylines.append(walk(key))
    return [np.array([points[k] for k in chain]) for chain in polylines]


def extract_level_set(field: Field, grid: Grid, level: float = 0.5) -> InterfaceCurve:
    """Positions where the linear interpolant of ``field`` equals ``level``."""
    u = np.asarray(field.values, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("field has non-finite values")
    if grid.geometry in ("line", "radial"):
        x, = grid.centers()
        return InterfaceCurve(grid.geometry, _crossings_1d(x, u, level), field.time, level)
    xc, yc = grid.centers()
    return InterfaceCurve("rectangle", _marching_squares(xc, yc, u, level), field.time, level)


def _point_segment_distance(pts, segs):
    """Min distance from each point (n, 2) to any segment (k, 2, 2)."""
    a, b = segs[:, 0, :], segs[:, 1, :]
    ab = b - a
    len2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    out = np.empty(len(pts))
    for start in range(0, len(pts), 2048):
        p = pts[start:start + 2048, None, :]
        t = np.clip(np.sum((p - a) * ab, axis=2) / len2, 0.0, 1.0)
        proj = a + t[..., None] * ab
        out[start:start + 2048] = np.sqrt(np.min(np.sum((p - proj)**2, axis=2), axis=1))
    return out


def unsigned_distance(curve: InterfaceCurve, x) -> np.ndarray:
    """Distance from each query position to ``curve``.

    Line: x are abscissae. Radial: x are radii or (n, dim) positions.
    Rectangle: x has shape (n, 2).
    """
    if curve.is_empty():
        raise DomainError("empty interface curve")
    if curve.geometry in ("line", "radial"):
        x = np.asarray(x, dtype=float)
        if curve.geometry == "radial" and x.ndim == 2:
            x = np.linalg.norm(x, axis=1)
        x = np.atleast_1d(x)
        return np.min(np.abs(x[:, None] - curve.vertices()[None, :]), axis=1)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    segs = curve.segments()
    if len(segs) == 0:
        return np.min(np.linalg.norm(pts[:, None, :] - curve.vertices()[None], axis=2), axis=1)
    return _point_segment_distance(pts, segs)


def signed_distance_at(curve: InterfaceCurve, x, plus_region_indicator) -> float:
    """(-1)^mu dist(x, curve): positive where u > level, negative where u < level.

    ``plus_region_indicator`` is a bool or a callable of ``x`` returning one.
    """
    inside = plus_region_indicator(x) if callable(plus_region_indicator) else plus_region_indicator
    x = np.asarray(x, dtype=float)
    if curve.geometry == "line":
        query = x.reshape(1)
    elif curve.geometry == "radial":
        query = np.atleast_1d(np.linalg.norm(x)) if x.ndim else x.reshape(1)
    else:
        query = x.reshape(1, 2)
    d = float(unsigned_distance(curve, query)[0])
    return d if inside else -d


def signed_distance_field(curve: InterfaceCurve, field: Field, grid: Grid) -> np.ndarray:
    """Signed distance at every cell center, sign from ``field > curve.level``."""
    coords = grid.mesh()
    if grid.geometry == "rectangle":
        pts = np.column_stack([c.ravel() for c in coords])
        d = unsigned_distance(curve, pts).reshape(grid.shape)
    else:
        d = unsigned_distance(curve, coords[0])
    return np.where(np.asarray(field.values) > curve.level, d, -d)
