"""Discrete-layer canopy air column.

One well-mixed node per storey-height layer, from the ground up to the
forcing height. Layers exchange heat by eddy diffusion through the free air
area of their common interface (roofs block the rest), and receive the heat
released by walls, roofs and ventilation of the buildings they contain. The
topmost layer is pinned to the undisturbed atmospheric temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .morphology import LayerStats

RHO_CP = 1.2 * 1005.0  # volumetric heat capacity of air [J K-1 m-3]


@dataclass(frozen=True)
class DiffusivityProfile:
    k_max: float = 2.0
    h_max: float = 60.0

    def __post_init__(self):
        if not (self.k_max > 0 and self.h_max > 0):
            raise ValueError("k_max and h_max must be positive")


def eddy_diffusivity(z, profile: DiffusivityProfile):
    """Linear-exponential eddy diffusivity [m2/s]; peaks at k_max for z = h_max."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("height must be non-negative")
    r = z_arr / profile.h_max
    k = profile.k_max * math.exp(0.5) * r * np.exp(-0.5 * r * r)
    return float(k) if np.ndim(k) == 0 else k


@dataclass
class CanopyState:
    theta: np.ndarray
    layer_height: float = 3.0
    n_canopy: int = 10

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise FloatingPointError("canopy temperature is not finite")
        if np.any(self.theta <= 150.0) or np.any(self.theta >= 400.0):
            raise FloatingPointError(f"canopy temperature out of bounds: {self.theta}")

    @property
    def n_total(self) -> int:
        return len(self.theta)

    @property
    def heights(self) -> np.ndarray:
        return (np.arange(self.n_total) + 0.5) * self.layer_height

    @property
    def forcing_height(self) -> float:
        return self.n_total * self.layer_height

    @classmethod
    def uniform(cls, value: float, n_total: int, layer_height: float = 3.0,
                n_canopy: int = 10) -> "CanopyState":
        return cls(np.full(n_total, float(value)), layer_height, n_canopy)


@dataclass
class LayerForcing:
    """Heat released into each layer [W]: walls, roofs below it, ventilation."""

    wall: np.ndarray
    roof: np.ndarray
    vent: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "LayerForcing":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n))

    @property
    def total(self) -> np.ndarray:
        return np.asarray(self.wall) + np.asarray(self.roof) + np.asarray(self.vent)


@dataclass(frozen=True)
class Column:
    """Geometry of the air column: free area per layer and interface conductances."""

    S_c: np.ndarray        # free plan area per layer [m2], length n_total
    interface: np.ndarray  # free area of interface k+1/2 [m2], length n_total-1
    K: np.ndarray          # eddy diffusivity at interface heights
    dz: float
    rho_cp: float = RHO_CP

    @classmethod
    def build(cls, stats: Sequence[LayerStats], n_total: int, dz: float,
              profile: DiffusivityProfile, rho_cp: float = RHO_CP) -> "Column":
        if len(stats) > n_total:
            raise ValueError("more canopy layers than column layers")
        plot = stats[0].S_f + stats[0].S_c
        S_c = np.full(n_total, plot, dtype=float)
        S_c[:len(stats)] = [s.S_c for s in stats]
        if np.any(S_c <= 0):
            raise ValueError("every layer needs a positive free canopy area")
        interface = np.minimum(S_c[:-1], S_c[1:])
        z_int = dz * np.arange(1, n_total)
        return cls(S_c, interface, eddy_diffusivity(z_int, profile), dz, rho_cp)

    @property
    def n_total(self) -> int:
        return len(self.S_c)

    @property
    def capacity(self) -> np.ndarray:
        """Heat capacity of each layer [J/K]."""
        return self.rho_cp * self.S_c * self.dz

    @property
    def conductance(self) -> np.ndarray:
        """Diffusive conductance of each interface [W/K]."""
        return self.rho_cp * self.interface * self.K / self.dz


def _column(state: CanopyState, stats, profile: DiffusivityProfile, rho_cp: float) -> Column:
    if isinstance(stats, Column):
        col = stats
    else:
        col = Column.build(stats, state.n_total, state.layer_height, profile, rho_cp)
    if col.n_total != state.n_total:
        raise ValueError(f"state has {state.n_total} layers, column has {col.n_total}")
    return col


def _sources(forcing: LayerForcing, n: int) -> np.ndarray:
    src = forcing.total
    if src.shape != (n,):
        raise ValueError(f"forcing must have {n} layers, got shape {src.shape}")
    return src


def interface_fluxes(theta: np.ndarray, column: Column) -> np.ndarray:
    """Upward diffusive heat flow through each interface [W]."""
    return column.conductance * (theta[:-1] - theta[1:])


def layer_tendency(state: CanopyState, stats, forcing: LayerForcing,
                   profile: DiffusivityProfile = DiffusivityProfile(), *,
                   closed_top: bool = False, rho_cp: float = RHO_CP) -> np.ndarray:
    """d(theta)/dt per layer [K/s]; the pinned top layer has zero tendency."""
    col = _column(state, stats, profile, rho_cp)
    src = _sources(forcing, col.n_total)
    flux = interface_fluxes(state.theta, col)
    net = src.copy()
    net[:-1] -= flux
    net[1:] += flux
    tend = net / col.capacity
    if not closed_top:
        tend[-1] = 0.0
    return tend


def canopy_step(state: CanopyState, stats, forcing: LayerForcing,
                profile: DiffusivityProfile, T_top: float | None, dt: float, *,
                rho_cp: float = RHO_CP) -> CanopyState:
    """Backward-Euler diffusion step with explicit sources.

    ``T_top=None`` closes the column top (zero flux) instead of pinning it.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    col = _column(state, stats, profile, rho_cp)
    src = _sources(forcing, col.n_total)
    g = col.conductance
    cap = col.capacity / dt
    n = col.n_total if T_top is None else col.n_total - 1
    diag = cap[:n].copy()
    diag[:-1] += g[:n - 1]
    diag[1:] += g[:n - 1]
    rhs = cap[:n] * state.theta[:n] + src[:n]
    if T_top is not None:
        diag[-1] += g[n - 1]
        rhs[-1] += g[n - 1] * T_top
    ab = np.zeros((3, n))
    ab[0, 1:] = -g[:n - 1]
    ab[1] = diag
    ab[2, :-1] = -g[:n - 1]
    new = solve_banded((1, 1), ab, rhs)
    theta = np.append(new, T_top) if T_top is not None else new
    return replace(state, theta=theta)


def top_flux(state: CanopyState, column: Column) -> float:
    """Heat leaving the free column into the pinned top layer [W]."""
    return float(column.conductance[-1] * (state.theta[-2] - state.theta[-1]))


def enthalpy(state: CanopyState, column: Column, closed_top: bool = False) -> float:
    """Heat content of the free layers relative to 0 K [J]."""
    n = column.n_total if closed_top else column.n_total - 1
    return float(np.sum(column.capacity[:n] * state.theta[:n]))
