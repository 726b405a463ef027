"""Shortwave and longwave exchange between the facets of a shoebox scene.

View factors come from closed-form rectangle integrals with an occlusion
fraction from sampled segments (see ``_kernels``). Shortwave uses beam +
isotropic diffuse sky, with inter-reflections solved as a radiosity system.
Longwave is a single-bounce exchange with the sky and the other facets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from typing import Sequence

import numpy as np

from . import _kernels
from .geometry import Facet, facet_arrays, facets_as_boxes

SIGMA = 5.670374419e-8

__all__ = [
    "Facet", "SkyModel", "SunPosition", "ViewFactorMatrix", "RadiationError", "SIGMA",
    "sun_position", "solar_noon", "view_factors", "periodic_view_factors", "sunlit_fraction",
    "shortwave", "solve_radiosity", "longwave", "aggregate_zone_flux",
]


class RadiationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SunPosition:
    altitude: float   # degrees above horizon
    azimuth: float    # degrees clockwise from north
    direction: np.ndarray  # unit vector (east, north, up)


@dataclass(frozen=True)
class SkyModel:
    dni: float
    dhi: float
    t_sky: float
    sun: np.ndarray

    def __post_init__(self):
        if self.dni < 0 or self.dhi < 0:
            raise ValueError("irradiances must be non-negative")
        sun = np.asarray(self.sun, dtype=float)
        norm = np.linalg.norm(sun)
        if norm > 0:
            sun = sun / norm
        object.__setattr__(self, "sun", sun)
        if sun[2] <= 0:
            object.__setattr__(self, "dni", 0.0)


@dataclass
class ViewFactorMatrix:
    F: np.ndarray
    F_sky: np.ndarray

    def reciprocity_error(self, areas: np.ndarray) -> float:
        af = areas[:, None] * self.F
        scale = np.maximum(np.abs(af), np.abs(af.T))
        mask = scale > 1e-12 * af.max()
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(af - af.T)[mask] / scale[mask]))

    def closure_error(self) -> float:
        return float(np.max(np.abs(self.F.sum(axis=1) + self.F_sky - 1.0)))


# --- solar geometry ---------------------------------------------------------

def _day_angle(when: datetime) -> float:
    n = when.timetuple().tm_yday
    return 2.0 * math.pi * (n - 1) / 365.0


def declination(when: datetime) -> float:
    """Solar declination [rad], Spencer's Fourier series."""
    g = _day_angle(when)
    return (0.006918 - 0.399912 * math.cos(g) + 0.070257 * math.sin(g)
            - 0.006758 * math.cos(2 * g) + 0.000907 * math.sin(2 * g)
            - 0.002697 * math.cos(3 * g) + 0.00148 * math.sin(3 * g))


def equation_of_time(when: datetime) -> float:
    """Equation of time [minutes]."""
    g = _day_angle(when)
    return 229.18 * (0.000075 + 0.001868 * math.cos(g) - 0.032077 * math.sin(g)
                     - 0.014615 * math.cos(2 * g) - 0.040849 * math.sin(2 * g))


def _utc(when: datetime) -> datetime:
    if when.tzinfo is None:
        return when.replace(tzinfo=timezone.utc)
    return when.astimezone(timezone.utc)


def sun_position(when: datetime, latitude: float, longitude: float) -> SunPosition:
    """Sun altitude/azimuth from declination and hour angle.

    Naive datetimes are taken as UTC. ``longitude`` is positive east.
    """
    t = _utc(when)
    hours = t.hour + t.minute / 60.0 + (t.second + t.microsecond * 1e-6) / 3600.0
    solar_time = hours + longitude / 15.0 + equation_of_time(t) / 60.0
    omega = math.radians(15.0 * (solar_time - 12.0))
    delta = declination(t)
    phi = math.radians(latitude)
    east = -math.cos(delta) * math.sin(omega)
    north = math.cos(phi) * math.sin(delta) - math.sin(phi) * math.cos(delta) * math.cos(omega)
    up = math.sin(phi) * math.sin(delta) + math.cos(phi) * math.cos(delta) * math.cos(omega)
    v = np.array([east, north, up])
    v /= np.linalg.norm(v)
    altitude = math.degrees(math.asin(max(-1.0, min(1.0, v[2]))))
    azimuth = math.degrees(math.atan2(v[0], v[1])) % 360.0
    return SunPosition(altitude, azimuth, v)


def solar_noon(day: date, longitude: float, tz=timezone.utc) -> datetime:
    """Instant of local solar noon on ``day``, expressed in ``tz``."""
    guess = datetime.combine(day, time(12), tzinfo=timezone.utc)
    for _ in range(3):
        minutes = 720.0 - 4.0 * longitude - equation_of_time(guess)
        guess = datetime.combine(day, time(0), tzinfo=timezone.utc) + timedelta(minutes=minutes)
    return guess.astimezone(tz)


# --- view factors -----------------------------------------------------------

def _boxes(facets, occluders):
    if occluders is None:
        return facets_as_boxes(facets)
    return np.asarray(occluders, dtype=float).reshape(-1, 6)


def _exchange(facets, rows, occluders, spacing, max_samples):
    arr = facet_arrays(facets)
    af = _kernels.exchange_rows(np.asarray(rows, dtype=np.int64), arr["axis"], arr["sign"],
                                arr["plane"], arr["lo"], arr["hi"], _boxes(facets, occluders),
                                float(spacing), int(max_samples))
    return af, arr["area"]


def view_factors(facets: Sequence[Facet], occluders=None, *, spacing: float = 2.0,
                 max_samples: int = 8) -> ViewFactorMatrix:
    """Dense view-factor matrix for ``facets``.

    ``occluders`` is an (n, 6) array of boxes; by default the facets
    themselves block each other's view.
    """
    n = len(facets)
    af, area = _exchange(facets, np.arange(n), occluders, spacing, max_samples)
    F = af / area[:, None]
    return ViewFactorMatrix(F, np.clip(1.0 - F.sum(axis=1), 0.0, None))


def periodic_view_factors(facets: Sequence[Facet], occluders=None, *, spacing: float = 2.0,
                          max_samples: int = 8) -> ViewFactorMatrix:
    """View factors among central facets of a tiled facet list.

    Rows are computed for central facets against every facet; replica
    columns fold onto their central counterpart (``src``), i.e. replicas are
    assumed to share the state of the central facet they copy. The folded
    exchange matrix is symmetrised so reciprocity holds on the central set.
    """
    central = [k for k, f in enumerate(facets) if f.studied]
    if central != list(range(len(central))):
        raise ValueError("central facets must come first in the facet list")
    nc = len(central)
    af, area = _exchange(facets, np.arange(nc), occluders, spacing, max_samples)
    src = np.array([f.src for f in facets])
    folded = np.zeros((nc, nc))
    for j in range(len(facets)):
        folded[:, src[j]] += af[:, j]
    folded = 0.5 * (folded + folded.T)
    F = folded / area[:nc, None]
    return ViewFactorMatrix(F, np.clip(1.0 - F.sum(axis=1), 0.0, None))


def sunlit_fraction(facets: Sequence[Facet], sun: np.ndarray, occluders=None, *,
                    spacing: float = 5.0, max_samples: int = 24) -> np.ndarray:
    arr = facet_arrays(facets)
    return _kernels.sunlit_fraction(np.arange(len(facets), dtype=np.int64), arr["axis"],
                                    arr["sign"], arr["plane"], arr["lo"], arr["hi"],
                                    np.asarray(sun, dtype=float), _boxes(facets, occluders),
                                    float(spacing), int(max_samples))


# --- shortwave --------------------------------------------------------------

def solve_radiosity(source: np.ndarray, albedo: np.ndarray, F: np.ndarray,
                    tol: float = 1e-6, max_iter: int = 10_000) -> np.ndarray:
    """Incident flux solving ``incident = source + F (albedo * incident)``."""
    albedo = np.asarray(albedo, dtype=float)
    if np.any(albedo >= 1.0):
        raise RadiationError("radiosity iteration cannot converge with albedo >= 1")
    incident = np.array(source, dtype=float)
    scale = max(1.0, float(np.max(np.abs(source))) if len(source) else 1.0)
    for _ in range(max_iter):
        nxt = source + F @ (albedo * incident)
        if np.max(np.abs(nxt - incident), initial=0.0) <= tol * scale:
            return nxt
        incident = nxt
    raise RadiationError("radiosity iteration did not converge")


def direct_and_diffuse(facets: Sequence[Facet], vf: ViewFactorMatrix, sky: SkyModel,
                       occluders=None, sunlit: np.ndarray | None = None) -> np.ndarray:
    """First-pass incident shortwave [W/m2]: beam plus isotropic sky diffuse."""
    normals = np.array([f.normal for f in facets])
    cos_inc = np.clip(normals @ sky.sun, 0.0, None)
    beam = np.zeros(len(facets))
    if sky.dni > 0 and np.any(cos_inc > 0):
        if sunlit is None:
            sunlit = sunlit_fraction(facets, sky.sun, occluders)
        beam = sky.dni * cos_inc * sunlit
    return beam + sky.dhi * vf.F_sky


def shortwave(facets: Sequence[Facet], vf: ViewFactorMatrix, sky: SkyModel, occluders=None,
              sunlit: np.ndarray | None = None) -> np.ndarray:
    """Absorbed shortwave per facet [W/m2], reflections included."""
    albedo = np.array([f.albedo for f in facets])
    source = direct_and_diffuse(facets, vf, sky, occluders, sunlit)
    incident = solve_radiosity(source, albedo, vf.F)
    return (1.0 - albedo) * incident


# --- longwave ---------------------------------------------------------------

def longwave(facets: Sequence[Facet], vf: ViewFactorMatrix, temps: np.ndarray,
             sky: SkyModel) -> np.ndarray:
    """Net longwave gain per facet [W/m2] (single bounce)."""
    eps = np.array([f.emissivity for f in facets])
    t4 = np.asarray(temps, dtype=float) ** 4
    exchange = vf.F @ t4 - vf.F.sum(axis=1) * t4
    return eps * SIGMA * (vf.F_sky * (sky.t_sky ** 4 - t4) + exchange)


# --- aggregation ------------------------------------------------------------

def aggregate_zone_flux(fluxes: np.ndarray, facets: Sequence[Facet], n_zones: int | None = None,
                        n_layers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-zone power [W] and per-layer power [W] over studied building facets."""
    zone = np.array([f.zone for f in facets])
    layer = np.array([f.layer for f in facets])
    area = np.array([f.area for f in facets])
    keep = np.array([f.studied and f.kind != "ground" for f in facets])
    if n_zones is None:
        n_zones = int(zone.max()) + 1 if len(zone) else 0
    if n_layers is None:
        n_layers = int(layer.max()) + 1 if len(layer) else 0
    power = np.asarray(fluxes, dtype=float) * area
    phi = np.bincount(zone[keep], weights=power[keep], minlength=n_zones)
    per_layer = np.bincount(layer[keep], weights=power[keep], minlength=n_layers)
    return phi, per_layer
