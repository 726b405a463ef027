"""Two-node RC model of one storey: thermal mass and indoor air.

All functions broadcast over numpy arrays, so a whole set of zones can be
stepped at once by passing array-valued parameters and states.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

RAMP_HALF_WIDTH = 2.0  # K on each side of the set point


@dataclass(frozen=True)
class ZoneParams:
    """Per-unit-area thermal characteristics and zone geometry.

    Conductance bases: ``k_ext`` per wall area, ``k_r`` per roof area,
    ``k_int`` per wall + roof area, ``k_vent`` and capacities per floor area.
    """

    k_ext: float = 0.15
    k_int: float = 0.15
    k_vent: float = 0.3
    k_r: float = 0.15
    c_w: float = 3e5
    c_a: float = 1.4e3
    eta: float = 0.15
    h_conv: float = 8.0
    q_c_min: float = -100.0
    q_c_max: float = 100.0
    t_targ: float = 292.15
    q_a: float = 100.0
    floor_area: float = 1.0
    wall_area: float = 0.0
    roof_area: float = 0.0
    height: float = 3.0

    def __post_init__(self):
        positive = ("k_ext", "k_int", "k_vent", "k_r", "c_w", "c_a", "h_conv", "floor_area", "height")
        for name in positive:
            if not np.all(np.asarray(getattr(self, name)) > 0):
                raise ValueError(f"{name} must be positive")
        if not np.all((np.asarray(self.eta) >= 0) & (np.asarray(self.eta) <= 1)):
            raise ValueError("eta must lie in [0, 1]")
        if not np.all((np.asarray(self.q_c_min) <= 0) & (np.asarray(self.q_c_max) >= 0)):
            raise ValueError("need q_c_min <= 0 <= q_c_max")
        if np.any(np.asarray(self.wall_area) < 0) or np.any(np.asarray(self.roof_area) < 0):
            raise ValueError("wall and roof areas must be non-negative")

    @property
    def K_ext(self):
        return self.k_ext * self.wall_area

    @property
    def K_r(self):
        return self.k_r * self.roof_area

    @property
    def K_int(self):
        return self.k_int * (self.wall_area + self.roof_area)

    @property
    def K_vent(self):
        return self.k_vent * self.floor_area

    @property
    def C_w(self):
        return self.c_w * self.floor_area

    @property
    def C_a(self):
        return self.c_a * self.floor_area

    @property
    def volume(self):
        return self.floor_area * self.height

    def without_control(self) -> "ZoneParams":
        return replace(self, q_c_min=0.0 * np.asarray(self.q_c_min), q_c_max=0.0 * np.asarray(self.q_c_max))

    @classmethod
    def stack(cls, items: list["ZoneParams"]) -> "ZoneParams":
        """Array-valued parameters from a list of scalar ones."""
        return cls(**{f.name: np.array([getattr(p, f.name) for p in items], dtype=float)
                      for f in fields(cls)})


@dataclass
class ZoneState:
    T_w: np.ndarray | float
    T_a: np.ndarray | float

    def __post_init__(self):
        for name in ("T_w", "T_a"):
            v = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v <= 150.0) or np.any(v >= 400.0):
                raise FloatingPointError(f"zone temperature {name} out of bounds")


@dataclass
class ZoneFluxes:
    H_w: np.ndarray | float  # W per m2 of wall
    H_r: np.ndarray | float  # W per m2 of roof
    q_v: np.ndarray | float  # W per m3 of zone volume
    Q_c: np.ndarray | float  # W per m2 of floor


def climatic_flux(T_a, params: ZoneParams):
    """Heating (+) / cooling (-) power per floor area: clamped linear ramp."""
    span = np.asarray(params.q_c_max) - np.asarray(params.q_c_min)
    pos = (np.asarray(T_a) - (np.asarray(params.t_targ) - RAMP_HALF_WIDTH)) / (2 * RAMP_HALF_WIDTH)
    q = params.q_c_max - span * np.clip(pos, 0.0, 1.0)
    return float(q) if np.ndim(q) == 0 else q


def split_radiative(phi, params: ZoneParams):
    """Radiative power reaching the indoor air and the thermal mass [W]."""
    phi = np.asarray(phi, dtype=float)
    phi_a = params.eta * phi
    phi_w = phi * (1.0 - params.eta) * params.k_ext / params.h_conv
    return phi_a, phi_w


def zone_tendency(state: ZoneState, theta_k, theta_k1, phi, params: ZoneParams, q_c=None):
    """(dT_w/dt, dT_a/dt) [K/s]. ``q_c`` overrides the controller (per floor area)."""
    T_w, T_a = np.asarray(state.T_w, dtype=float), np.asarray(state.T_a, dtype=float)
    if q_c is None:
        q_c = climatic_flux(T_a, params)
    phi_a, phi_w = split_radiative(phi, params)
    mass = (params.K_int * (T_a - T_w) + params.K_ext * (theta_k - T_w)
            + params.K_r * (theta_k1 - T_w) + phi_w)
    air = (params.K_int * (T_w - T_a) + params.K_vent * (theta_k - T_a)
           + q_c * params.floor_area + params.q_a * params.floor_area + phi_a)
    return mass / params.C_w, air / params.C_a


def surface_fluxes(state: ZoneState, theta_k, theta_k1, params: ZoneParams) -> ZoneFluxes:
    """Heat released towards the canopy (positive into the air)."""
    T_w, T_a = np.asarray(state.T_w, dtype=float), np.asarray(state.T_a, dtype=float)
    return ZoneFluxes(
        H_w=params.k_ext * (T_w - theta_k),
        H_r=params.k_r * (T_w - theta_k1),
        q_v=params.k_vent * params.floor_area * (T_a - theta_k) / params.volume,
        Q_c=climatic_flux(T_a, params),
    )


def zone_step(state: ZoneState, theta_k, theta_k1, phi, params: ZoneParams, dt: float) -> ZoneState:
    """Backward-Euler step of both nodes, the controller included implicitly.

    The controller is piecewise linear in T_a, so the implicit system is
    solved on each of its three pieces and the consistent solution kept.
    The power actually delivered over the step is
    ``climatic_flux(new.T_a, params)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    p = params
    T_w, T_a = np.asarray(state.T_w, dtype=float), np.asarray(state.T_a, dtype=float)
    phi_a, phi_w = split_radiative(phi, p)
    A = p.floor_area
    a11 = p.C_w / dt + p.K_int + p.K_ext + p.K_r
    a12 = -p.K_int
    r1 = p.C_w / dt * T_w + p.K_ext * theta_k + p.K_r * theta_k1 + phi_w
    a22 = p.C_a / dt + p.K_int + p.K_vent
    r2 = p.C_a / dt * T_a + p.K_vent * theta_k + p.q_a * A + phi_a

    def solve(gain, offset):
        # Q_c * A = offset - gain * T_a'
        b22 = a22 + gain
        s2 = r2 + offset
        det = a11 * b22 - a12 * a12
        return (r1 * b22 - a12 * s2) / det, (a11 * s2 - a12 * r1) / det

    span = np.asarray(p.q_c_max) - np.asarray(p.q_c_min)
    lo_edge = np.asarray(p.t_targ) - RAMP_HALF_WIDTH
    hi_edge = np.asarray(p.t_targ) + RAMP_HALF_WIDTH
    gain = span / (2 * RAMP_HALF_WIDTH) * A
    w_r, a_r = solve(gain, (p.q_c_max + span * lo_edge / (2 * RAMP_HALF_WIDTH)) * A)
    w_hot, a_hot = solve(0.0, p.q_c_min * A)
    w_cold, a_cold = solve(0.0, p.q_c_max * A)
    cold = a_r < lo_edge
    hot = a_r > hi_edge
    new_w = np.where(cold, w_cold, np.where(hot, w_hot, w_r))
    new_a = np.where(cold, a_cold, np.where(hot, a_hot, a_r))
    if np.ndim(new_w) == 0:
        return ZoneState(float(new_w), float(new_a))
    return ZoneState(new_w, new_a)


def stored_energy(state: ZoneState, params: ZoneParams) -> float:
    """Heat content of all zones relative to 0 K [J]."""
    return float(np.sum(params.C_w * np.asarray(state.T_w) + params.C_a * np.asarray(state.T_a)))
