"""Axis-aligned geometry shared by the morphology and radiation modules.

Every surface in a shoebox scene is an axis-aligned rectangle. A rectangle is
stored as the axis of its normal (0=x, 1=y, 2=z), the sign of the outward
normal, the plane coordinate along that axis, and its extents ``lo``/``hi``
along the two remaining axes taken in increasing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9

# In-plane axes for each normal axis.
PLANE_AXES = ((1, 2), (0, 2), (0, 1))

KINDS = ("wall", "roof", "ground")


@dataclass(frozen=True)
class Facet:
    """One planar, axis-aligned rectangular surface of the scene.

    ``zone`` is the index of the owning thermal zone in the central cell (-1
    for ground). Replica facets carry the zone of their central counterpart,
    which is also recorded in ``src``.
    """

    kind: str
    axis: int
    sign: int
    plane: float
    lo: tuple[float, float]
    hi: tuple[float, float]
    zone: int = -1
    layer: int = 0
    albedo: float = 0.2
    emissivity: float = 0.9
    studied: bool = True
    src: int = -1
    building: int = -1
    storey: int = -1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown facet kind {self.kind!r}")
        if self.axis not in (0, 1, 2) or self.sign not in (-1, 1):
            raise ValueError("facet axis must be 0..2 and sign +-1")
        if not (self.hi[0] - self.lo[0] > TOL and self.hi[1] - self.lo[1] > TOL):
            raise ValueError("degenerate facet")
        if not (0.0 <= self.albedo <= 1.0 and 0.0 <= self.emissivity <= 1.0):
            raise ValueError("albedo and emissivity must lie in [0, 1]")

    @property
    def normal(self) -> np.ndarray:
        n = np.zeros(3)
        n[self.axis] = self.sign
        return n

    @property
    def area(self) -> float:
        return (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """3D (min, max) corners."""
        a, b = PLANE_AXES[self.axis]
        lo = np.empty(3)
        hi = np.empty(3)
        lo[self.axis] = hi[self.axis] = self.plane
        lo[a], lo[b] = self.lo
        hi[a], hi[b] = self.hi
        return lo, hi

    @property
    def origin(self) -> np.ndarray:
        return self.bounds[0]

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        a, b = PLANE_AXES[self.axis]
        u = np.zeros(3)
        v = np.zeros(3)
        u[a] = self.hi[0] - self.lo[0]
        v[b] = self.hi[1] - self.lo[1]
        return u, v

    @property
    def centroid(self) -> np.ndarray:
        lo, hi = self.bounds
        return 0.5 * (lo + hi)

    def translated(self, offset: Sequence[float], **changes) -> "Facet":
        a, b = PLANE_AXES[self.axis]
        d = np.asarray(offset, dtype=float)
        fields = dict(
            kind=self.kind, axis=self.axis, sign=self.sign,
            plane=self.plane + d[self.axis],
            lo=(self.lo[0] + d[a], self.lo[1] + d[b]),
            hi=(self.hi[0] + d[a], self.hi[1] + d[b]),
            zone=self.zone, layer=self.layer, albedo=self.albedo,
            emissivity=self.emissivity, studied=self.studied, src=self.src,
            building=self.building, storey=self.storey,
        )
        fields.update(changes)
        return Facet(**fields)


def facet_arrays(facets: Sequence[Facet]) -> dict[str, np.ndarray]:
    """Struct-of-arrays view of a facet list, as consumed by the kernels."""
    n = len(facets)
    axis = np.empty(n, dtype=np.int64)
    sign = np.empty(n, dtype=np.int64)
    plane = np.empty(n)
    lo = np.empty((n, 2))
    hi = np.empty((n, 2))
    for i, f in enumerate(facets):
        axis[i] = f.axis
        sign[i] = f.sign
        plane[i] = f.plane
        lo[i] = f.lo
        hi[i] = f.hi
    area = (hi[:, 0] - lo[:, 0]) * (hi[:, 1] - lo[:, 1])
    return dict(axis=axis, sign=sign, plane=plane, lo=lo, hi=hi, area=area)


def facets_as_boxes(facets: Sequence[Facet]) -> np.ndarray:
    """Zero-thickness boxes (xmin, ymin, zmin, xmax, ymax, zmax) for facets."""
    out = np.empty((len(facets), 6))
    for i, f in enumerate(facets):
        lo, hi = f.bounds
        out[i, :3] = lo
        out[i, 3:] = hi
    return out


# --- rectilinear polygons ---------------------------------------------------

def polygon_area(poly: Sequence[Sequence[float]]) -> float:
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_edges(poly):
    n = len(poly)
    return [(tuple(poly[i]), tuple(poly[(i + 1) % n])) for i in range(n)]


def is_axis_aligned(poly) -> bool:
    for (x0, y0), (x1, y1) in polygon_edges(poly):
        dx, dy = abs(x1 - x0), abs(y1 - y0)
        if (dx > TOL) == (dy > TOL):
            return False
    return True


def _segments_intersect(a, b):
    (p0, p1), (q0, q1) = a, b
    ax0, ax1 = sorted((p0[0], p1[0]))
    ay0, ay1 = sorted((p0[1], p1[1]))
    bx0, bx1 = sorted((q0[0], q1[0]))
    by0, by1 = sorted((q0[1], q1[1]))
    return ax0 <= bx1 + TOL and bx0 <= ax1 + TOL and ay0 <= by1 + TOL and by0 <= ay1 + TOL


def is_simple(poly) -> bool:
    """True when no two non-adjacent edges of an axis-aligned polygon touch."""
    edges = polygon_edges(poly)
    n = len(edges)
    if n < 4:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(edges[i], edges[j]):
                return False
    return True


def point_in_polygon(x: float, y: float, poly) -> bool:
    inside = False
    for (x0, y0), (x1, y1) in polygon_edges(poly):
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc > x:
                inside = not inside
    return inside


def rectangles(poly) -> list[tuple[float, float, float, float]]:
    """Decompose a rectilinear polygon into disjoint (x0, y0, x1, y1) boxes.

    Grid cells from the vertex coordinates are merged into horizontal runs,
    then runs with identical spans in consecutive rows are merged vertically.
    """
    xs = sorted({float(p[0]) for p in poly})
    ys = sorted({float(p[1]) for p in poly})
    rows = []
    for j in range(len(ys) - 1):
        yc = 0.5 * (ys[j] + ys[j + 1])
        runs = []
        start = None
        for i in range(len(xs) - 1):
            inside = point_in_polygon(0.5 * (xs[i] + xs[i + 1]), yc, poly)
            if inside and start is None:
                start = xs[i]
            if not inside and start is not None:
                runs.append((start, xs[i]))
                start = None
        if start is not None:
            runs.append((start, xs[-1]))
        rows.append(runs)
    out = []
    open_runs: dict[tuple[float, float], float] = {}
    for j, runs in enumerate(rows):
        current = set(runs)
        for run in list(open_runs):
            if run not in current:
                out.append((run[0], open_runs.pop(run), run[1], ys[j]))
        for run in runs:
            open_runs.setdefault(run, ys[j])
    for run, y0 in open_runs.items():
        out.append((run[0], y0, run[1], ys[-1]))
    return sorted(out, key=lambda r: (r[1], r[0]))


def subtract_intervals(lo: float, hi: float, cuts) -> list[tuple[float, float]]:
    """Parts of [lo, hi] not covered by any interval in ``cuts``."""
    pieces = [(lo, hi)]
    for c0, c1 in cuts:
        nxt = []
        for a, b in pieces:
            if c1 <= a + TOL or c0 >= b - TOL:
                nxt.append((a, b))
                continue
            if c0 > a + TOL:
                nxt.append((a, c0))
            if c1 < b - TOL:
                nxt.append((c1, b))
        pieces = nxt
    return [(a, b) for a, b in pieces if b - a > 1e-6]


def split_interval(lo: float, hi: float, max_len: float) -> list[float]:
    n = max(1, int(np.ceil((hi - lo) / max_len - 1e-9)))
    return list(np.linspace(lo, hi, n + 1))
