"""Shoebox scene model, per-layer statistics, tiling and facetization.

A scene is one plot (the studied cell) holding extruded rectilinear
buildings. The city around it is assumed to repeat the plot periodically, so
wall exposure is always evaluated against the periodic continuation of the
plot; ``tiling`` only controls how many replicas take part in shading and
inter-reflections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Any

import numpy as np

from .geometry import (
    TOL,
    Facet,
    is_axis_aligned,
    is_simple,
    point_in_polygon,
    polygon_area,
    polygon_edges,
    rectangles,
    split_interval,
    subtract_intervals,
)

CASES = ("regular_slabs", "convex_slabs", "even_open_block", "uneven_open_block")


class SceneError(ValueError):
    """Invalid scene description. ``field`` names the offending entry."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class Building:
    footprint: tuple[tuple[float, float], ...]
    storeys: int
    zone_params_ref: str = "default"
    name: str = ""

    def __post_init__(self):
        fp = tuple((float(x), float(y)) for x, y in self.footprint)
        if len(fp) > 1 and abs(fp[0][0] - fp[-1][0]) < TOL and abs(fp[0][1] - fp[-1][1]) < TOL:
            fp = fp[:-1]
        object.__setattr__(self, "footprint", fp)
        label = self.name or "building"
        if int(self.storeys) != self.storeys or self.storeys < 1:
            raise SceneError("storeys must be an integer >= 1", f"{label}.storeys")
        object.__setattr__(self, "storeys", int(self.storeys))
        if len(fp) < 4 or not is_axis_aligned(fp):
            raise SceneError("footprint edges must be axis-aligned", f"{label}.footprint")
        if not is_simple(fp):
            raise SceneError("footprint must be a simple polygon", f"{label}.footprint")
        area = polygon_area(fp)
        if area <= 0:
            raise SceneError("footprint vertices must be counter-clockwise with positive area",
                             f"{label}.footprint")

    @property
    def area(self) -> float:
        return polygon_area(self.footprint)

    @property
    def rectangles(self):
        return _rectangles(self.footprint)

    @property
    def bbox(self):
        xy = np.asarray(self.footprint)
        return (*xy.min(axis=0), *xy.max(axis=0))

    @property
    def min_width(self) -> float:
        """Smallest horizontal dimension: shortest inside run along x or y scan lines."""
        return _min_run(self.footprint)


@lru_cache(maxsize=None)
def _rectangles(footprint):
    return tuple(rectangles(footprint))


def _runs(poly, swap):
    pts = [(y, x) for x, y in poly] if swap else list(poly)
    xs = sorted({p[0] for p in pts})
    ys = sorted({p[1] for p in pts})
    for y0, y1 in zip(ys, ys[1:]):
        yc = 0.5 * (y0 + y1)
        start = None
        for x0, x1 in zip(xs, xs[1:]):
            inside = point_in_polygon(0.5 * (x0 + x1), yc, pts)
            if inside and start is None:
                start = x0
            elif not inside and start is not None:
                yield x0 - start
                start = None
        if start is not None:
            yield xs[-1] - start


@lru_cache(maxsize=None)
def _min_run(footprint) -> float:
    return min(min(_runs(footprint, False)), min(_runs(footprint, True)))


@dataclass(frozen=True)
class Scene:
    plot_dx: float
    plot_dy: float
    storey_height: float
    buildings: tuple[Building, ...]
    tiling: tuple[int, int] = (1, 1)

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        object.__setattr__(self, "tiling", tuple(int(t) for t in self.tiling))
        for name in ("plot_dx", "plot_dy", "storey_height"):
            if not getattr(self, name) > 0:
                raise SceneError("must be positive", name)
        if not self.buildings:
            raise SceneError("at least one building is required", "buildings")
        nx, ny = self.tiling
        if nx < 1 or ny < 1 or nx % 2 == 0 or ny % 2 == 0:
            raise SceneError("tiling counts must be odd and >= 1", "tiling")
        for k, b in enumerate(self.buildings):
            x0, y0, x1, y1 = b.bbox
            if x0 < -TOL or y0 < -TOL or x1 > self.plot_dx + TOL or y1 > self.plot_dy + TOL:
                raise SceneError("building lies outside the plot", f"buildings[{k}].footprint")
        rects = [(k, r) for k, b in enumerate(self.buildings) for r in b.rectangles]
        for (k1, a), (k2, b) in product(rects, rects):
            if k1 < k2 and _overlap(a, b):
                raise SceneError(f"footprints of buildings {k1} and {k2} overlap",
                                 f"buildings[{k2}].footprint")

    @property
    def plot_area(self) -> float:
        return self.plot_dx * self.plot_dy

    @property
    def n_layers(self) -> int:
        """Number of canopy layers: the tallest building's storey count."""
        return max(b.storeys for b in self.buildings)

    @property
    def floor_area(self) -> float:
        return sum(b.area * b.storeys for b in self.buildings)

    def cells(self) -> list[tuple[int, int]]:
        """Tile cells, central cell first."""
        nx, ny = self.tiling
        cells = [(i, j) for j in range(-(ny // 2), ny // 2 + 1)
                 for i in range(-(nx // 2), nx // 2 + 1)]
        cells.remove((0, 0))
        return [(0, 0)] + cells

    def all_buildings(self) -> list[tuple[Building, tuple[int, int]]]:
        return [(b, c) for c in self.cells() for b in self.buildings]

    def zones(self) -> list[tuple[int, int]]:
        """(building index, storey) of every zone of the central cell."""
        return [(k, s) for k, b in enumerate(self.buildings) for s in range(b.storeys)]


def _overlap(a, b) -> bool:
    return (min(a[2], b[2]) - max(a[0], b[0]) > TOL) and (min(a[3], b[3]) - max(a[1], b[1]) > TOL)


@dataclass(frozen=True)
class LayerStats:
    S_f: float
    S_c: float
    S_r: float
    l_w: float


@dataclass(frozen=True)
class WallSegment:
    """Exposed part of a building edge over one storey."""

    building: int
    storey: int
    axis: int     # normal axis, 0 (x) or 1 (y)
    sign: int
    plane: float
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


def _edge_records(b: Building):
    out = []
    for (x0, y0), (x1, y1) in polygon_edges(b.footprint):
        if abs(y1 - y0) < TOL:   # runs along x, normal along y
            sign = -1 if x1 > x0 else 1
            out.append((1, sign, y0, min(x0, x1), max(x0, x1)))
        else:
            sign = 1 if y1 > y0 else -1
            out.append((0, sign, x0, min(y0, y1), max(y0, y1)))
    return out


@lru_cache(maxsize=64)
def exposed_walls(scene: Scene) -> tuple[WallSegment, ...]:
    """Exposed wall segments per storey of the central buildings.

    An edge portion is hidden at storey ``s`` when the opposite, collinear
    edge of a neighbour (or a periodic image of one) with more than ``s``
    storeys covers it.
    """
    edges = [_edge_records(b) for b in scene.buildings]
    period = (scene.plot_dx, scene.plot_dy)
    out = []
    for k, b in enumerate(scene.buildings):
        for axis, sign, plane, lo, hi in edges[k]:
            covers = []
            for k2, b2 in enumerate(scene.buildings):
                for ox, oy in product((-1, 0, 1), repeat=2):
                    if k2 == k and ox == 0 and oy == 0:
                        continue
                    shift = (ox * period[0], oy * period[1])
                    for ax2, sg2, pl2, lo2, hi2 in edges[k2]:
                        if ax2 != axis or sg2 != -sign:
                            continue
                        if abs(pl2 + shift[axis] - plane) > 1e-6:
                            continue
                        along = shift[1 - axis]
                        c0, c1 = lo2 + along, hi2 + along
                        if c1 > lo + TOL and c0 < hi - TOL:
                            covers.append((max(c0, lo), min(c1, hi), b2.storeys))
            for s in range(b.storeys):
                cuts = [(c0, c1) for c0, c1, h in covers if h > s]
                for a, z in subtract_intervals(lo, hi, cuts):
                    out.append(WallSegment(k, s, axis, sign, plane, a, z))
    return tuple(out)


def layer_stats(scene: Scene, layer_index: int) -> LayerStats:
    if not 0 <= layer_index < scene.n_layers:
        raise IndexError(f"layer {layer_index} outside 0..{scene.n_layers - 1}")
    S_f = sum(b.area for b in scene.buildings if b.storeys > layer_index)
    S_r = sum(b.area for b in scene.buildings if b.storeys == layer_index + 1)
    l_w = sum(w.length for w in exposed_walls(scene) if w.storey == layer_index)
    return LayerStats(S_f=S_f, S_c=scene.plot_area - S_f, S_r=S_r, l_w=l_w)


def all_layer_stats(scene: Scene) -> list[LayerStats]:
    return [layer_stats(scene, k) for k in range(scene.n_layers)]


def tile(scene: Scene, nx: int, ny: int) -> Scene:
    if nx < 1 or ny < 1 or nx % 2 == 0 or ny % 2 == 0:
        raise ValueError(f"tiling counts must be odd and >= 1, got {nx}x{ny}")
    if (nx, ny) == scene.tiling:
        return scene
    return Scene(scene.plot_dx, scene.plot_dy, scene.storey_height, scene.buildings, (nx, ny))


def occluder_boxes(scene: Scene) -> np.ndarray:
    """Solid boxes (xmin, ymin, zmin, xmax, ymax, zmax) of all tiled buildings."""
    boxes = []
    for b, (i, j) in scene.all_buildings():
        ox, oy = i * scene.plot_dx, j * scene.plot_dy
        top = b.storeys * scene.storey_height
        for x0, y0, x1, y1 in b.rectangles:
            boxes.append((x0 + ox, y0 + oy, 0.0, x1 + ox, y1 + oy, top))
    return np.asarray(boxes, dtype=float)


def ground_rectangles(scene: Scene, cell: float = 20.0):
    """Free plan area of the central plot, split into cells no larger than ``cell``."""
    xs = {0.0, scene.plot_dx}
    ys = {0.0, scene.plot_dy}
    for b in scene.buildings:
        xs.update(p[0] for p in b.footprint)
        ys.update(p[1] for p in b.footprint)
    xs, ys = sorted(xs), sorted(ys)
    gx = sorted({v for a, c in zip(xs, xs[1:]) for v in split_interval(a, c, cell)})
    gy = sorted({v for a, c in zip(ys, ys[1:]) for v in split_interval(a, c, cell)})
    out = []
    for y0, y1 in zip(gy, gy[1:]):
        for x0, x1 in zip(gx, gx[1:]):
            xc, yc = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            if not any(point_in_polygon(xc, yc, b.footprint) for b in scene.buildings):
                out.append((x0, y0, x1, y1))
    return out


def facetize(scene: Scene, *, albedo: float = 0.2, ground_albedo: float = 0.2,
             emissivity: float = 0.9, ground_cell: float = 20.0) -> list[Facet]:
    """Rectangular facets of the tiled scene, central cell first.

    One facet per storey per exposed wall segment, one per roof rectangle and
    a set of ground cells covering the free canopy area. Replicas follow in
    cell order with ``studied=False`` and ``src`` pointing at the central
    counterpart.
    """
    dz = scene.storey_height
    zone_index = {z: n for n, z in enumerate(scene.zones())}
    central: list[Facet] = []
    for w in exposed_walls(scene):
        central.append(Facet(
            "wall", w.axis, w.sign, w.plane, (w.lo, w.storey * dz), (w.hi, (w.storey + 1) * dz),
            zone=zone_index[(w.building, w.storey)], layer=w.storey, albedo=albedo,
            emissivity=emissivity, building=w.building, storey=w.storey))
    for k, b in enumerate(scene.buildings):
        top = b.storeys - 1
        for x0, y0, x1, y1 in b.rectangles:
            central.append(Facet(
                "roof", 2, 1, b.storeys * dz, (x0, y0), (x1, y1), zone=zone_index[(k, top)],
                layer=top, albedo=albedo, emissivity=emissivity, building=k, storey=top))
    for x0, y0, x1, y1 in ground_rectangles(scene, ground_cell):
        central.append(Facet("ground", 2, 1, 0.0, (x0, y0), (x1, y1), zone=-1, layer=0,
                             albedo=ground_albedo, emissivity=emissivity))
    central = [Facet(**{**f.__dict__, "src": n}) for n, f in enumerate(central)]
    out = list(central)
    for i, j in scene.cells()[1:]:
        shift = (i * scene.plot_dx, j * scene.plot_dy, 0.0)
        out.extend(f.translated(shift, studied=False) for f in central)
    return out


# --- scene files ------------------------------------------------------------

def scene_to_dict(scene: Scene) -> dict[str, Any]:
    return {
        "plot": {"dx": scene.plot_dx, "dy": scene.plot_dy},
        "storey_height": scene.storey_height,
        "buildings": [
            {"name": b.name, "footprint": [list(p) for p in b.footprint],
             "storeys": b.storeys, "zone_params_ref": b.zone_params_ref}
            for b in scene.buildings
        ],
        "tiling": {"nx": scene.tiling[0], "ny": scene.tiling[1]},
    }


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise SceneError("missing field", f"{where}.{key}" if where else key)
    return d[key]


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneError(f"expected a number, got {value!r}", where)
    return float(value)


def scene_from_dict(data: dict[str, Any]) -> Scene:
    if not isinstance(data, dict):
        raise SceneError("scene document must be an object")
    plot = _need(data, "plot", "")
    dx = _number(_need(plot, "dx", "plot"), "plot.dx")
    dy = _number(_need(plot, "dy", "plot"), "plot.dy")
    dz = _number(_need(data, "storey_height", ""), "storey_height")
    raw = _need(data, "buildings", "")
    if not isinstance(raw, list):
        raise SceneError("expected a list", "buildings")
    buildings = []
    for k, rb in enumerate(raw):
        where = f"buildings[{k}]"
        fp = _need(rb, "footprint", where)
        if not isinstance(fp, list) or not all(isinstance(p, list) and len(p) == 2 for p in fp):
            raise SceneError("expected a list of [x, y] pairs", f"{where}.footprint")
        pts = [(_number(x, f"{where}.footprint"), _number(y, f"{where}.footprint")) for x, y in fp]
        storeys = _need(rb, "storeys", where)
        if isinstance(storeys, bool) or not isinstance(storeys, int):
            raise SceneError(f"expected an integer, got {storeys!r}", f"{where}.storeys")
        try:
            buildings.append(Building(tuple(pts), storeys, str(rb.get("zone_params_ref", "default")),
                                      str(rb.get("name", ""))))
        except SceneError as exc:
            raise SceneError(str(exc).split(": ", 1)[-1], f"{where}.{exc.field.split('.')[-1]}") from None
    tiling = data.get("tiling", {"nx": 1, "ny": 1})
    nx = _need(tiling, "nx", "tiling")
    ny = _need(tiling, "ny", "tiling")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (nx, ny)):
        raise SceneError("expected integers", "tiling")
    return Scene(dx, dy, dz, tuple(buildings), (nx, ny))


def load_scene(path: str | Path) -> Scene:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scene_from_dict(data)


def dump_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")


def generate_case(kind: str) -> Scene:
    """One of the four reference morphologies, untiled."""
    if kind not in CASES:
        raise ValueError(f"unknown case {kind!r}; expected one of {', '.join(CASES)}")
    text = resources.files("urbanflux.cases").joinpath(f"{kind}.json").read_text()
    return scene_from_dict(json.loads(text))


# --- checks -----------------------------------------------------------------

@dataclass
class Check:
    rule: str
    passed: bool
    detail: str = ""


def check_scene(scene: Scene, case_constraints: bool = False) -> list[Check]:
    """Rule-by-rule report; structural invariants are enforced on construction."""
    checks = [
        Check("plot dimensions positive", True),
        Check("buildings inside plot, footprints disjoint", True),
        Check("footprints simple, counter-clockwise, axis-aligned", True),
    ]
    stats = all_layer_stats(scene)
    ok = all(abs(s.S_f + s.S_c - scene.plot_area) < 1e-6 for s in stats)
    checks.append(Check("S_f + S_c equals plot area in every layer", ok))
    if case_constraints:
        checks.extend(reference_case_checks(scene))
    return checks


def reference_case_checks(scene: Scene) -> list[Check]:
    out = []
    area = scene.floor_area
    out.append(Check("total floor area 40000 m2 (+-0.5%)", abs(area - 40000.0) <= 200.0,
                     f"{area:.1f} m2"))
    dims = sorted((scene.plot_dx, scene.plot_dy))
    out.append(Check("plot 100 m x 200 m", np.allclose(dims, (100.0, 200.0)),
                     f"{scene.plot_dx:g} x {scene.plot_dy:g}"))
    out.append(Check("storey height 3 m", abs(scene.storey_height - 3.0) < 1e-9))
    out.append(Check("tallest buildings 10 storeys", scene.n_layers == 10, f"{scene.n_layers}"))
    for k, b in enumerate(scene.buildings):
        w = b.min_width
        label = b.name or f"buildings[{k}]"
        out.append(Check(f"{label} width 20 m", abs(w - 20.0) < 1e-6, f"{w:g} m"))
    return out
