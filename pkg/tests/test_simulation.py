import csv
import math
from dataclasses import replace
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from conftest import case_run
from urbanflux import radiation
from urbanflux.canopy import RHO_CP, Column, DiffusivityProfile
from urbanflux.morphology import Building, Scene, all_layer_stats
from urbanflux.params import Params, apply_overrides
from urbanflux.simulation import (RunConfig, WeatherError, WeatherSeries, clear_sky, compare_cases,
                                  energy_audit, load_results, run, save_results,
                                  surface_dissipation, synth_weather, write_facets, write_outputs)

CET = timezone(timedelta(hours=1))


def rect(x0, y0, x1, y1):
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


TOY = Scene(60.0, 60.0, 3.0, (Building(rect(20, 20, 40, 40), 2, name="toy"),), (3, 3))


def toy_params(**canopy):
    p = Params()
    return replace(p, canopy=replace(p.canopy, forcing_height=12.0, **canopy))


def flat_weather(t=278.0):
    times = [datetime(2014, 1, 3, h, tzinfo=CET) for h in range(24)]
    return WeatherSeries(times, np.full(24, t), np.zeros(24), np.zeros(24), periodic=True)


class TestWeather:
    def test_synthetic_records(self, weather):
        assert len(weather.times) == 24
        assert all(b > a for a, b in zip(weather.times, weather.times[1:]))
        assert weather.dni[0] == 0.0 and weather.dhi[0] == 0.0
        assert int(np.argmin(weather.t_atm)) == 5
        assert weather.t_atm.mean() == pytest.approx(273.15)
        assert weather.t_atm.max() - weather.t_atm.min() == pytest.approx(8.0)
        assert np.allclose(weather.dhi, 0.12 * weather.dni)

    def test_noon_dni(self):
        noon = radiation.solar_noon(date(2014, 1, 3), 7.59, CET)
        dni, dhi = clear_sky(radiation.sun_position(noon, 47.56, 7.59).altitude)
        assert dni == pytest.approx(900 * math.exp(-0.25 / math.sin(math.radians(19.5))), abs=5)
        assert dni == pytest.approx(428, abs=5)

    def test_gap_detected(self):
        times = [datetime(2014, 1, 3, h, tzinfo=CET) for h in (0, 1, 2, 4, 5)]
        with pytest.raises(WeatherError, match="gap"):
            WeatherSeries(times, np.full(5, 270.0), np.zeros(5), np.zeros(5))

    def test_order_and_sign(self):
        t = [datetime(2014, 1, 3, h, tzinfo=CET) for h in (0, 1)]
        with pytest.raises(WeatherError):
            WeatherSeries(t[::-1], [270.0, 271.0], [0, 0], [0, 0])
        with pytest.raises(WeatherError):
            WeatherSeries(t, [270.0, 271.0], [-1.0, 0], [0, 0])

    def test_interpolation_and_wrap(self, weather):
        mid = weather.times[3] + timedelta(minutes=30)
        assert weather.at(mid)[0] == pytest.approx(0.5 * (weather.t_atm[3] + weather.t_atm[4]))
        late = weather.times[23] + timedelta(minutes=30)
        assert weather.at(late)[0] == pytest.approx(0.5 * (weather.t_atm[23] + weather.t_atm[0]))
        assert weather.at(weather.times[0] + timedelta(days=3))[0] == weather.t_atm[0]

    def test_coverage(self):
        w = replace(synth_weather(), periodic=False)
        with pytest.raises(WeatherError):
            w.at(w.times[-1] + timedelta(minutes=1))
        with pytest.raises(WeatherError):
            run(TOY, w, toy_params())

    def test_csv_round_trip(self, weather, tmp_path):
        weather.to_csv(tmp_path / "w.csv")
        back = WeatherSeries.from_csv(tmp_path / "w.csv", periodic=True)
        assert back.times == weather.times
        assert np.allclose(back.t_atm, weather.t_atm) and np.allclose(back.dni, weather.dni)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(dt_couple=0.0), dict(dt_couple=7.0),
                                    dict(output_interval=90.0), dict(duration=10.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            RunConfig(**kw)


def test_global_fixed_point():
    p = apply_overrides(toy_params(), ["bem.q_a=0", "bem.q_c_min=0", "bem.q_c_max=0",
                                       "radiation.sky_offset=0"])
    r = run(TOY, flat_weather(278.0), p)
    assert np.max(np.abs(r.theta - 278.0)) < 1e-9
    assert np.max(np.abs(r.T_a - 278.0)) < 1e-9 and np.max(np.abs(r.T_w - 278.0)) < 1e-9
    assert all(abs(surface_dissipation(r, k)) < 1e-6 for k in range(r.n_layers))
    assert r.heat_demand == 0.0


def test_deterministic():
    a = run(TOY, synth_weather(), toy_params(), RunConfig(spinup_days=1))
    b = run(TOY, synth_weather(), toy_params(), RunConfig(spinup_days=1))
    assert np.array_equal(a.theta, b.theta) and np.array_equal(a.T_a, b.T_a)
    assert all(np.array_equal(a.energy[k], b.energy[k]) for k in a.energy)


def test_independent_audit_from_output_series():
    """Rebuild the energy budget from the 60 s output series only."""
    scene = TOY
    p = toy_params()
    r = run(scene, synth_weather(), p, RunConfig(output_interval=60.0, spinup_days=1))
    dt = 60.0
    b = scene.buildings[0]
    c_w = p.bem.c_w * b.area
    c_a = p.bem.c_a * b.area
    stats = all_layer_stats(scene)
    col = Column.build(stats, 4, 3.0, DiffusivityProfile(), RHO_CP)
    cap = RHO_CP * np.array([s.S_c for s in stats] + [scene.plot_area] * 2) * 3.0

    def stored(n):
        return (np.sum(c_w * r.T_w[n] + c_a * r.T_a[n]) + np.sum(cap[:-1] * r.theta[n, :-1]))

    phi_a = p.bem.eta * r.phi[1:]
    phi_w = r.phi[1:] * (1 - p.bem.eta) * p.bem.k_ext / p.bem.h_conv
    inputs = np.sum(r.Q_c[1:] + p.bem.q_a * b.area + phi_a + phi_w) * dt
    z = 9.0
    k_top = 2.0 * math.exp(0.5) * (z / 60.0) * math.exp(-0.5 * (z / 60.0) ** 2)
    g_top = RHO_CP * scene.plot_area * k_top / 3.0
    top = np.sum(g_top * (r.theta[1:, -2] - r.theta[1:, -1])) * dt
    storage = stored(len(r.times) - 1) - stored(0)
    gross = np.sum(np.abs(r.Q_c[1:]) + p.bem.q_a * b.area + np.abs(phi_a) + np.abs(phi_w)) * dt
    assert abs(storage - (inputs - top)) < 0.01 * gross
    assert abs(storage - (inputs - top)) < 1e-6 * gross
    assert col.conductance[-1] == pytest.approx(g_top)


def test_hand_integrated_two_steps():
    p = toy_params()
    cfg = RunConfig(duration=120.0, spinup_days=0, output_interval=60.0)
    r = run(TOY, synth_weather(), p, cfg)
    b = TOY.buildings[0]
    wall = 4 * 20 * 3.0
    s_f = b.area
    total = np.zeros(2)
    for n in (1, 2):
        before = r.theta[n - 1]
        for z, (_, storey) in enumerate(r.zone_ids):
            h_w = p.bem.k_ext * (r.T_w[n, z] - before[storey])
            h_r = p.bem.k_r * (r.T_w[n, z] - before[storey + 1]) if storey == 1 else 0.0
            total[storey] += (h_w * wall + h_r * b.area) * 60.0
    expected = total / 3600.0 / s_f
    got = [surface_dissipation(r, k) for k in range(2)]
    assert got == pytest.approx(expected, rel=1e-10)


def test_facet_dump_matches_layer_sums(tmp_path):
    r = run(TOY, synth_weather(), toy_params(), RunConfig(spinup_days=0, dump_facets=True))
    write_facets(r, tmp_path / "facets.csv")
    sums = np.zeros(r.n_layers)
    with open(tmp_path / "facets.csv") as fh:
        for row in csv.DictReader(fh):
            if row["kind"] != "ground":
                sums[int(row["layer"]) - 1] += float(row["net_sw_W_m2"]) * float(row["area_m2"]) * 3600.0
    assert sums == pytest.approx(r.energy["solar"], rel=1e-5)


def test_compare_identical_and_mismatch():
    a = run(TOY, synth_weather(), toy_params(), RunConfig(spinup_days=0), name="a")
    rows = compare_cases([a, a])
    assert rows and all(row["difference"] == 0 and row["relative"] == 0 for row in rows)
    other = run(TOY, synth_weather(), apply_overrides(toy_params(), ["bem.eta=0.3"]),
                RunConfig(spinup_days=0), name="b")
    with pytest.raises(ValueError):
        compare_cases([a, other])


def test_outputs_and_archive(tmp_path):
    r = run(TOY, synth_weather(), toy_params(), RunConfig(spinup_days=0), name="toy")
    write_outputs(r, tmp_path)
    for name in ("layers.csv", "canopy.csv", "zones.csv"):
        with open(tmp_path / name) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) > 1
    with open(tmp_path / "canopy.csv") as fh:
        first = next(csv.DictReader(fh))
    assert datetime.fromisoformat(first["time"]).utcoffset() == timedelta(hours=1)
    save_results(r, tmp_path / "r.npz")
    back = load_results(tmp_path / "r.npz")
    assert back.times == r.times and np.array_equal(back.theta, r.theta)
    assert back.heat_demand == r.heat_demand and back.meta == r.meta


class TestReferenceRuns:
    def test_energy_closure(self, case_runs):
        for r in case_runs.values():
            assert energy_audit(r)["relative"] < 0.01

    def test_cumulative_signs(self, case_runs):
        for r in case_runs.values():
            assert np.all(r.energy["solar"] >= 0)
            assert np.all(r.energy["heating"] >= 0) and np.all(r.energy["cooling"] >= 0)

    def test_roof_layer_dissipates_most(self):
        r = case_run("regular_slabs")
        diss = [surface_dissipation(r, k) for k in range(10)]
        assert diss[9] > max(diss[:9])

    def test_heating_in_all_layers(self):
        r = case_run("regular_slabs")
        assert np.all(r.energy["heating"] > 0)
