"""Coupled run: radiation -> zone energy balances -> canopy column.

Radiation is solved once per radiation interval and held constant inside
it; zones and canopy advance together every coupling step. The zone step
sees the canopy temperatures at the start of the step, and the canopy step
receives exactly the heat the zones gave away, so the energy budget of the
coupled system closes to round-off.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bem, canopy, radiation
from .morphology import Scene, all_layer_stats, facetize, occluder_boxes
from .params import Params

J_PER_WH = 3600.0


class WeatherError(ValueError):
    pass


@dataclass
class WeatherSeries:
    """Hourly (or other uniform-step) forcing at the column top.

    A ``periodic`` series repeats with period ``len(times) * step``.
    """

    times: list[datetime]
    t_atm: np.ndarray
    dni: np.ndarray
    dhi: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        self.times = [_aware(t) for t in self.times]
        self.t_atm = np.asarray(self.t_atm, dtype=float)
        self.dni = np.asarray(self.dni, dtype=float)
        self.dhi = np.asarray(self.dhi, dtype=float)
        n = len(self.times)
        if n < 2 or not (len(self.t_atm) == len(self.dni) == len(self.dhi) == n):
            raise WeatherError("weather needs at least two complete records")
        steps = np.diff([t.timestamp() for t in self.times])
        if np.any(steps <= 0):
            raise WeatherError("weather instants must be strictly increasing")
        if np.any(np.abs(steps - steps[0]) > 1e-6):
            k = int(np.argmax(np.abs(steps - steps[0]) > 1e-6))
            raise WeatherError(f"weather gap or irregular step after {self.times[k].isoformat()}")
        if np.any(self.dni < 0) or np.any(self.dhi < 0):
            raise WeatherError("irradiances must be non-negative")
        if not np.all(np.isfinite(self.t_atm)):
            raise WeatherError("non-finite temperature in weather")

    @property
    def step(self) -> float:
        return self.times[1].timestamp() - self.times[0].timestamp()

    @property
    def start(self) -> datetime:
        return self.times[0]

    @property
    def end(self) -> datetime:
        """Last instant at which the series is defined (periodic: one period on)."""
        if self.periodic:
            return self.times[0] + timedelta(seconds=self.step * len(self.times))
        return self.times[-1]

    def _position(self, when: datetime) -> float:
        x = (_aware(when).timestamp() - self.times[0].timestamp()) / self.step
        n = len(self.times)
        if self.periodic:
            return x % n
        if x < -1e-9 or x > n - 1 + 1e-9:
            raise WeatherError(f"weather does not cover {when.isoformat()}")
        return min(max(x, 0.0), n - 1.0)

    def at(self, when: datetime) -> tuple[float, float, float]:
        """(T_atm, DNI, DHI) linearly interpolated at ``when``."""
        x = self._position(when)
        n = len(self.times)
        i = int(math.floor(x))
        f = x - i
        j = (i + 1) % n if self.periodic else min(i + 1, n - 1)
        i %= n
        lerp = lambda v: float((1 - f) * v[i] + f * v[j])
        return lerp(self.t_atm), lerp(self.dni), lerp(self.dhi)

    def covers(self, start: datetime, end: datetime) -> bool:
        if self.periodic:
            return True
        return self.times[0] <= _aware(start) and _aware(end) <= self.times[-1]

    def signature(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([t.isoformat() for t in self.times]).encode())
        for arr in (self.t_atm, self.dni, self.dhi):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(bytes([self.periodic]))
        return h.hexdigest()[:16]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "t_atm_K", "dni_W_m2", "dhi_W_m2"])
            for t, a, b, c in zip(self.times, self.t_atm, self.dni, self.dhi):
                w.writerow([t.isoformat(), f"{a:.6f}", f"{b:.6f}", f"{c:.6f}"])

    @classmethod
    def from_csv(cls, path: str | Path, periodic: bool = False) -> "WeatherSeries":
        times, ta, dn, dh = [], [], [], []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.DictReader(fh), start=2):
                try:
                    times.append(datetime.fromisoformat(row["time"]))
                    ta.append(float(row["t_atm_K"]))
                    dn.append(float(row["dni_W_m2"]))
                    dh.append(float(row["dhi_W_m2"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise WeatherError(f"{path}:{lineno}: bad weather record ({exc})") from None
        return cls(times, np.array(ta), np.array(dn), np.array(dh), periodic)


def _aware(t: datetime) -> datetime:
    return t if t.tzinfo is not None else t.replace(tzinfo=timezone.utc)


def clear_sky(altitude_deg: float) -> tuple[float, float]:
    """(DNI, DHI) of the synthetic clear winter sky for a sun altitude."""
    if altitude_deg <= 0:
        return 0.0, 0.0
    dni = 900.0 * math.exp(-0.25 / math.sin(math.radians(altitude_deg)))
    return dni, 0.12 * dni


def synth_weather(kind: str = "clear_winter", day: date = date(2014, 1, 3),
                  latitude: float = 47.56, longitude: float = 7.59,
                  utc_offset: float = 1.0, mean: float = 273.15,
                  amplitude: float = 4.0) -> WeatherSeries:
    """24 hourly records of a clear winter day, periodic.

    Temperature is a sinusoid with its minimum at 05:00 local time.
    """
    if kind != "clear_winter":
        raise ValueError(f"unknown synthetic weather {kind!r}")
    tz = timezone(timedelta(hours=utc_offset))
    times = [datetime(day.year, day.month, day.day, h, tzinfo=tz) for h in range(24)]
    t_atm = np.array([mean - amplitude * math.cos(2 * math.pi * (h - 5) / 24) for h in range(24)])
    dni, dhi = np.zeros(24), np.zeros(24)
    for h, t in enumerate(times):
        dni[h], dhi[h] = clear_sky(radiation.sun_position(t, latitude, longitude).altitude)
    return WeatherSeries(times, t_atm, dni, dhi, periodic=True)


@dataclass(frozen=True)
class RunConfig:
    dt_couple: float = 60.0
    radiation_interval: float = 3600.0
    latitude: float = 47.56
    longitude: float = 7.59
    start: datetime | None = None
    duration: float = 86400.0
    spinup_days: int = 2
    output_interval: float = 900.0
    dump_facets: bool = False

    def __post_init__(self):
        if not self.dt_couple > 0:
            raise ValueError("dt_couple must be positive")
        ratio = self.radiation_interval / self.dt_couple
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise ValueError("dt_couple must divide the radiation interval")
        if self.duration < self.dt_couple:
            raise ValueError("duration shorter than one coupling step")
        ratio = self.output_interval / self.dt_couple
        if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
            raise ValueError("dt_couple must divide the output interval")

    def to_dict(self):
        d = asdict(self)
        d["start"] = self.start.isoformat() if self.start else None
        return d


@dataclass
class Zones:
    """Array view of every zone of the central cell."""

    ids: list[tuple[int, int]]
    names: list[str]
    storey: np.ndarray
    params: bem.ZoneParams

    @classmethod
    def build(cls, scene: Scene, facets: Sequence[radiation.Facet], params: Params) -> "Zones":
        ids = scene.zones()
        n = len(ids)
        wall = np.zeros(n)
        roof = np.zeros(n)
        for f in facets:
            if f.studied and f.kind == "wall":
                wall[f.zone] += f.area
            elif f.studied and f.kind == "roof":
                roof[f.zone] += f.area
        items = []
        for z, (k, s) in enumerate(ids):
            b = scene.buildings[k]
            p = params.bem_for(b.zone_params_ref)
            items.append(bem.ZoneParams(**asdict(p), floor_area=b.area, wall_area=wall[z],
                                        roof_area=roof[z], height=scene.storey_height))
        names = [scene.buildings[k].name or f"b{k}" for k, _ in ids]
        return cls(ids, names, np.array([s for _, s in ids]), bem.ZoneParams.stack(items))


@dataclass
class RunResults:
    times: list[datetime]
    heights: np.ndarray
    theta: np.ndarray            # (n_out, n_total)
    t_top: np.ndarray            # forcing temperature at each output time
    zone_ids: list[tuple[int, int]]
    zone_names: list[str]
    T_a: np.ndarray              # (n_out, n_zones)
    T_w: np.ndarray
    Q_c: np.ndarray              # W per zone
    phi: np.ndarray              # W per zone
    floor_area: np.ndarray       # S_f per canopy layer
    energy: dict[str, np.ndarray]  # per-layer cumulative [J]
    audit: dict[str, float]
    meta: dict
    facet_dump: list | None = None

    @property
    def n_layers(self) -> int:
        return len(self.floor_area)

    def per_floor(self, key: str) -> np.ndarray:
        """Per-layer cumulative energy normalised by floor area [Wh/m2]."""
        return self.energy[key] / J_PER_WH / self.floor_area

    @property
    def heat_demand(self) -> float:
        """Total |Q_c| over the reported period [Wh]."""
        return float(np.sum(self.energy["heating"] + self.energy["cooling"]) / J_PER_WH)

    def profile(self, hour: float) -> np.ndarray:
        """Canopy column at the first output instant at local clock ``hour``."""
        for t, th in zip(self.times, self.theta):
            if abs(t.hour + t.minute / 60 - hour) < 1e-9:
                return th
        raise KeyError(f"no output at {hour:g} h")

    def forcing_at(self, hour: float) -> float:
        for t, v in zip(self.times, self.t_top):
            if abs(t.hour + t.minute / 60 - hour) < 1e-9:
                return float(v)
        raise KeyError(f"no output at {hour:g} h")


def energy_audit(results: RunResults) -> dict[str, float]:
    """Closure of the reported period: storage change vs inputs minus top loss."""
    a = results.audit
    lhs = (a["bem_end"] - a["bem_start"]) + (a["canopy_end"] - a["canopy_start"])
    rhs = a["inputs"] - a["top_loss"]
    gross = a["gross"]
    return {"storage_change": lhs, "net_input": rhs, "imbalance": lhs - rhs,
            "relative": abs(lhs - rhs) / gross if gross > 0 else 0.0}


def run(scene: Scene, weather: WeatherSeries, params: Params = Params(),
        config: RunConfig = RunConfig(), name: str = "") -> RunResults:
    """Simulate the reported window after ``config.spinup_days`` repeats of it."""
    clock = time.perf_counter()
    start = _aware(config.start) if config.start else weather.start
    end = start + timedelta(seconds=config.duration)
    if not weather.covers(start, end):
        raise WeatherError(f"weather does not cover {start.isoformat()} .. {end.isoformat()}")

    rp = params.radiation
    facets = facetize(scene, albedo=rp.albedo, ground_albedo=rp.ground_albedo,
                      emissivity=rp.emissivity, ground_cell=rp.ground_cell)
    boxes = occluder_boxes(scene)
    nc = sum(f.studied for f in facets)
    central = facets[:nc]
    vf = radiation.periodic_view_factors(facets, boxes, spacing=rp.vf_spacing,
                                         max_samples=rp.vf_max_samples)
    zones = Zones.build(scene, central, params)
    zp = zones.params
    stats = all_layer_stats(scene)
    n_can = scene.n_layers
    dz = scene.storey_height
    n_total = int(round(params.canopy.forcing_height / dz))
    if n_total <= n_can or abs(n_total * dz - params.canopy.forcing_height) > 1e-6:
        raise ValueError("forcing height must be a multiple of the storey height above the roofs")
    profile = canopy.DiffusivityProfile(params.canopy.k_max, params.canopy.h_max)
    column = canopy.Column.build(stats, n_total, dz, profile, params.canopy.rho_cp)

    facet_zone = np.array([f.zone for f in central])
    is_ground = facet_zone < 0
    zone_storey = zones.storey
    n_z = len(zones.ids)

    t0_atm = weather.at(start)[0]
    state = canopy.CanopyState.uniform(t0_atm, n_total, dz, n_can)
    zs = bem.ZoneState(np.full(n_z, t0_atm), np.full(n_z, t0_atm))

    n_steps = int(round(config.duration / config.dt_couple))
    per_rad = int(round(config.radiation_interval / config.dt_couple))
    per_out = int(round(config.output_interval / config.dt_couple))
    dt = config.dt_couple
    sw_cache: dict[int, np.ndarray] = {}

    def shortwave_for(k_rad: int) -> np.ndarray:
        if k_rad not in sw_cache:
            mid = start + timedelta(seconds=(k_rad + 0.5) * config.radiation_interval)
            _, dni, dhi = weather.at(mid)
            sun = radiation.sun_position(mid, config.latitude, config.longitude)
            sky = radiation.SkyModel(dni, dhi, 0.0, sun.direction)
            sunlit = None
            if sky.dni > 0:
                sunlit = radiation.sunlit_fraction(central, sky.sun, boxes,
                                                   spacing=rp.shadow_spacing)
            sw_cache[k_rad] = radiation.shortwave(central, vf, sky, boxes, sunlit)
        return sw_cache[k_rad]

    def radiation_for(k_rad: int, zs: bem.ZoneState, theta: np.ndarray):
        mid = start + timedelta(seconds=(k_rad + 0.5) * config.radiation_interval)
        t_atm = weather.at(mid)[0]
        sky = radiation.SkyModel(0.0, 0.0, t_atm - rp.sky_offset, np.array([0.0, 0.0, 1.0]))
        temps = np.where(is_ground, theta[0], np.asarray(zs.T_w)[np.maximum(facet_zone, 0)])
        sw = shortwave_for(k_rad)
        lw = radiation.longwave(central, vf, temps, sky)
        phi, _ = radiation.aggregate_zone_flux(sw + lw, central, n_z, n_can)
        _, sw_layer = radiation.aggregate_zone_flux(sw, central, n_z, n_can)
        return phi, sw_layer, sw, lw

    def simulate(state, zs, record: bool, means: dict | None):
        energy = {k: np.zeros(n_can) for k in
                  ("solar", "dissipation", "anthropogenic", "venting", "heating", "cooling")}
        out = dict(times=[], theta=[], t_top=[], T_a=[], T_w=[], Q_c=[], phi=[])
        dump = [] if (record and config.dump_facets) else None
        inputs = top_loss = gross = 0.0
        e0 = (bem.stored_energy(zs, zp), canopy.enthalpy(state, column))
        q_c = np.asarray(bem.climatic_flux(zs.T_a, zp)) * zp.floor_area
        phi = np.zeros(n_z)

        def snapshot(t, t_top):
            out["times"].append(t)
            out["theta"].append(state.theta.copy())
            out["t_top"].append(t_top)
            out["T_a"].append(np.array(zs.T_a, dtype=float))
            out["T_w"].append(np.array(zs.T_w, dtype=float))
            out["Q_c"].append(np.array(q_c, dtype=float))
            out["phi"].append(phi.copy())

        if record:
            snapshot(start, state.theta[-1])
        for n in range(n_steps):
            t = start + timedelta(seconds=n * dt)
            if n % per_rad == 0:
                k_rad = n // per_rad
                phi, sw_layer, sw, lw = radiation_for(k_rad, zs, state.theta)
                if dump is not None:
                    dump.append((t, sw.copy(), lw.copy()))
            theta_k = state.theta[zone_storey]
            theta_k1 = state.theta[zone_storey + 1]
            zs = bem.zone_step(zs, theta_k, theta_k1, phi, zp, dt)
            q_c = np.asarray(bem.climatic_flux(zs.T_a, zp)) * zp.floor_area
            fx = bem.surface_fluxes(zs, theta_k, theta_k1, zp)
            wall_w = fx.H_w * zp.wall_area
            roof_w = fx.H_r * zp.roof_area
            vent_w = fx.q_v * zp.volume
            forcing = canopy.LayerForcing(
                np.bincount(zone_storey, wall_w, n_total),
                np.bincount(zone_storey + 1, roof_w, n_total),
                np.bincount(zone_storey, vent_w, n_total))
            t_next = t + timedelta(seconds=dt)
            t_top = weather.at(t_next)[0]
            state = canopy.canopy_step(state, column, forcing, profile, t_top, dt)

            phi_a, phi_w = bem.split_radiative(phi, zp)
            q_a = zp.q_a * zp.floor_area
            step_in = float(np.sum(q_c + q_a + phi_a + phi_w))
            step_top = canopy.top_flux(state, column)
            inputs += step_in * dt
            top_loss += step_top * dt
            gross += (float(np.sum(np.abs(q_c) + np.abs(q_a) + np.abs(phi_a) + np.abs(phi_w)))
                      + abs(step_top)) * dt
            energy["solar"] += sw_layer * dt
            energy["dissipation"] += np.bincount(zone_storey, wall_w + roof_w, n_can) * dt
            energy["anthropogenic"] += (np.bincount(zone_storey, wall_w, n_total)
                                        + np.bincount(zone_storey + 1, roof_w, n_total))[:n_can] * dt
            energy["venting"] += np.bincount(zone_storey, vent_w, n_can) * dt
            energy["heating"] += np.bincount(zone_storey, np.maximum(q_c, 0.0), n_can) * dt
            energy["cooling"] += np.bincount(zone_storey, np.maximum(-q_c, 0.0), n_can) * dt
            if means is not None:
                means["T_a"] += np.asarray(zs.T_a)
                means["theta_k"] += theta_k
                means["theta_k1"] += theta_k1
                means["phi_w"] += phi_w
            if record and (n + 1) % per_out == 0:
                snapshot(t_next, t_top)
        audit = dict(bem_start=e0[0], canopy_start=e0[1], bem_end=bem.stored_energy(zs, zp),
                     canopy_end=canopy.enthalpy(state, column), inputs=inputs,
                     top_loss=top_loss, gross=gross)
        return state, zs, energy, out, audit, dump

    for day in range(config.spinup_days):
        means = {k: np.zeros(n_z) for k in ("T_a", "theta_k", "theta_k1", "phi_w")} if day == 0 else None
        state, zs, *_ = simulate(state, zs, False, means)
        if means is not None:
            # The mass node's time constant is weeks; start it at its
            # equilibrium with the first day's mean conditions.
            m = {k: v / n_steps for k, v in means.items()}
            g = zp.K_int + zp.K_ext + zp.K_r
            T_w = (zp.K_int * m["T_a"] + zp.K_ext * m["theta_k"] + zp.K_r * m["theta_k1"]
                   + m["phi_w"]) / g
            zs = bem.ZoneState(T_w, zs.T_a)
    state, zs, energy, out, audit, dump = simulate(state, zs, True, None)

    meta = dict(name=name, scene_tiling=list(scene.tiling), n_facets=len(facets),
                n_central_facets=nc, n_zones=n_z, weather=weather.signature(),
                params=params.to_dict(), config=config.to_dict(),
                signature=_signature(weather, params, config),
                elapsed_s=time.perf_counter() - clock)
    return RunResults(
        times=out["times"], heights=state.heights, theta=np.array(out["theta"]),
        t_top=np.array(out["t_top"]), zone_ids=zones.ids, zone_names=zones.names,
        T_a=np.array(out["T_a"]), T_w=np.array(out["T_w"]), Q_c=np.array(out["Q_c"]),
        phi=np.array(out["phi"]), floor_area=np.array([s.S_f for s in stats]),
        energy=energy, audit=audit, meta=meta,
        facet_dump=[(t, central, sw, lw) for t, sw, lw in dump] if dump is not None else None)


def _signature(weather, params, config) -> str:
    cfg = config.to_dict()
    blob = json.dumps([weather.signature(), params.to_dict(), cfg], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def surface_dissipation(results: RunResults, layer: int) -> float:
    """Wall + roof losses of the zones of storey ``layer`` [Wh per m2 floor]."""
    return float(results.per_floor("dissipation")[layer])


def anthropogenic_release(results: RunResults, layer: int) -> float:
    """Wall heat of the layer plus roof heat of the layer below [Wh per m2 floor]."""
    return float(results.per_floor("anthropogenic")[layer])


COMPARE_METRICS = ("solar", "dissipation", "heat_demand")


def _per_floor_metric(r: RunResults, metric: str) -> np.ndarray:
    if metric == "heat_demand":
        return (r.energy["heating"] + r.energy["cooling"]) / J_PER_WH / r.floor_area
    return r.per_floor(metric)


def _total_metric(r: RunResults, metric: str) -> float:
    if metric == "heat_demand":
        return r.heat_demand
    return float(np.sum(r.energy[metric]) / J_PER_WH)


def compare_cases(runs: Sequence[RunResults], hours: Sequence[float] = (5.0, 15.0)) -> list[dict]:
    """Per-layer and total differences of each run relative to the first one.

    Energies are compared per floor area [Wh/m2] layer by layer and as totals
    [Wh]; canopy temperatures as differences [K] at the requested hours.
    """
    if not runs:
        return []
    ref = runs[0]
    for r in runs[1:]:
        if (r.meta.get("signature") != ref.meta.get("signature")
                or r.theta.shape[1] != ref.theta.shape[1]):
            raise ValueError(f"run {r.meta.get('name')!r} does not share weather, params and config")
    rows = []

    def rel(v, base):
        return (v - base) / base if base != 0 else (0.0 if v == base else math.inf)

    for metric in COMPARE_METRICS:
        base_layers = _per_floor_metric(ref, metric)
        for r in runs:
            vals = _per_floor_metric(r, metric)
            for k in range(max(len(vals), len(base_layers))):
                v = float(vals[k]) if k < len(vals) else float("nan")
                b = float(base_layers[k]) if k < len(base_layers) else float("nan")
                rows.append(dict(case=r.meta.get("name", ""), metric=metric, layer=k + 1,
                                 value=v, reference=b, difference=v - b, relative=rel(v, b)))
            v, b = _total_metric(r, metric), _total_metric(ref, metric)
            rows.append(dict(case=r.meta.get("name", ""), metric=metric, layer="total",
                             value=v, reference=b, difference=v - b, relative=rel(v, b)))
    for hour in hours:
        base = ref.profile(hour)
        for r in runs:
            th = r.profile(hour)
            for k, z in enumerate(r.heights):
                rows.append(dict(case=r.meta.get("name", ""), metric=f"theta_{hour:02.0f}h",
                                 layer=k + 1, value=float(th[k]), reference=float(base[k]),
                                 difference=float(th[k] - base[k]),
                                 relative=float((th[k] - base[k]) / base[k])))
    return rows


# --- outputs ----------------------------------------------------------------

def write_layers(results: RunResults, path: str | Path) -> None:
    dz = results.heights[1] - results.heights[0]
    keys = ("solar", "dissipation", "anthropogenic", "venting", "heating", "cooling")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["layer", "z_bottom_m", "z_top_m", "floor_area_m2"]
                   + [f"{k}_Wh_m2" for k in keys] + ["heat_demand_Wh_m2"])
        vals = {k: results.per_floor(k) for k in keys}
        for k in range(results.n_layers):
            row = [k + 1, f"{k * dz:g}", f"{(k + 1) * dz:g}", f"{results.floor_area[k]:.3f}"]
            row += [f"{vals[key][k]:.6f}" for key in keys]
            row.append(f"{vals['heating'][k] + vals['cooling'][k]:.6f}")
            w.writerow(row)


def write_canopy(results: RunResults, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "z_m", "theta_K"])
        for t, th in zip(results.times, results.theta):
            for z, v in zip(results.heights, th):
                w.writerow([t.isoformat(), f"{z:g}", f"{v:.6f}"])


def write_zones(results: RunResults, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "building", "storey", "T_a_K", "T_w_K", "Q_c_W", "phi_W"])
        for n, t in enumerate(results.times):
            for z, (name, (_, s)) in enumerate(zip(results.zone_names, results.zone_ids)):
                w.writerow([t.isoformat(), name, s + 1, f"{results.T_a[n, z]:.6f}",
                            f"{results.T_w[n, z]:.6f}", f"{results.Q_c[n, z]:.6f}",
                            f"{results.phi[n, z]:.6f}"])


def write_facets(results: RunResults, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "facet", "kind", "layer", "zone", "area_m2", "net_sw_W_m2", "net_lw_W_m2"])
        for t, facets, sw, lw in results.facet_dump or []:
            for i, f in enumerate(facets):
                w.writerow([t.isoformat(), i, f.kind, f.layer + 1, f.zone, f"{f.area:.6f}",
                            f"{sw[i]:.6f}", f"{lw[i]:.6f}"])


def write_comparison(rows: list[dict], path: str | Path) -> None:
    cols = ["case", "metric", "layer", "value", "reference", "difference", "relative"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{r[k]:.6g}" if isinstance(r[k], float) else r[k]) for k in cols})


def write_outputs(results: RunResults, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_layers(results, out / "layers.csv")
    write_canopy(results, out / "canopy.csv")
    write_zones(results, out / "zones.csv")
    if results.facet_dump is not None:
        write_facets(results, out / "facets.csv")


def save_results(results: RunResults, path: str | Path) -> None:
    """Binary archive of everything ``compare_cases`` and the CSV writers need."""
    arrays = {f"energy_{k}": v for k, v in results.energy.items()}
    np.savez_compressed(
        path, heights=results.heights, theta=results.theta, t_top=results.t_top,
        T_a=results.T_a, T_w=results.T_w, Q_c=results.Q_c, phi=results.phi,
        floor_area=results.floor_area, zone_ids=np.array(results.zone_ids, dtype=int).reshape(-1, 2),
        header=np.array(json.dumps(dict(
            times=[t.isoformat() for t in results.times], zone_names=results.zone_names,
            audit=results.audit, meta=results.meta))),
        **arrays)


def load_results(path: str | Path) -> RunResults:
    with np.load(path) as data:
        head = json.loads(str(data["header"]))
        energy = {k[len("energy_"):]: data[k] for k in data.files if k.startswith("energy_")}
        return RunResults(
            times=[datetime.fromisoformat(t) for t in head["times"]], heights=data["heights"],
            theta=data["theta"], t_top=data["t_top"],
            zone_ids=[tuple(int(v) for v in z) for z in data["zone_ids"]],
            zone_names=head["zone_names"], T_a=data["T_a"], T_w=data["T_w"], Q_c=data["Q_c"],
            phi=data["phi"], floor_area=data["floor_area"], energy=energy,
            audit=head["audit"], meta=head["meta"])
