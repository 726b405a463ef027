import math
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from urbanflux import radiation
from urbanflux.geometry import Facet
from urbanflux.morphology import CASES, facetize, generate_case, occluder_boxes
from urbanflux.radiation import (RadiationError, SkyModel, aggregate_zone_flux, longwave,
                                 periodic_view_factors, shortwave, solve_radiosity, sun_position,
                                 sunlit_fraction, view_factors)

CET = timezone(timedelta(hours=1))
UP = np.array([0.0, 0.0, 1.0])


def plate(z, sign, lo=(0, 0), hi=(1, 1), kind="roof", **kw):
    return Facet(kind, 2, sign, z, lo, hi, **kw)


class TestViewFactors:
    def test_opposed_squares(self):
        vf = view_factors([plate(0, 1), plate(1, -1)])
        assert vf.F[0, 1] == pytest.approx(oracles.opposed_rectangles(1, 1, 1), abs=1e-7)
        assert vf.F[0, 1] == pytest.approx(0.1998249, abs=1e-6)

    @pytest.mark.parametrize("a,b,c", [(2, 3, 1), (10, 1, 4), (0.5, 0.5, 3)])
    def test_opposed_rectangles(self, a, b, c):
        vf = view_factors([plate(0, 1, hi=(a, b)), plate(c, -1, hi=(a, b))])
        assert vf.F[0, 1] == pytest.approx(oracles.opposed_rectangles(a, b, c), rel=1e-8)

    @pytest.mark.parametrize("h,w,l", [(1, 1, 1), (2, 1, 3), (20, 3, 5)])
    def test_common_edge(self, h, w, l):
        floor = plate(0, 1, hi=(w, l))
        wall = Facet("wall", 0, 1, 0.0, (0, 0), (l, h))
        vf = view_factors([floor, wall])
        assert vf.F[0, 1] == pytest.approx(oracles.perpendicular_common_edge(h, w, l), rel=1e-7)

    def test_offset_perpendicular_vs_monte_carlo(self):
        floor = plate(0, 1, lo=(1, 0), hi=(3, 2))
        wall = Facet("wall", 0, 1, 0.0, (0.5, 0.5), (2.5, 2.0))
        af = view_factors([floor, wall]).F[0, 1] * floor.area
        ref = oracles.monte_carlo_af(([1, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 1]),
                                     ([0, 0.5, 0.5], [0, 2, 0], [0, 0, 1.5], [1, 0, 0]))
        assert af == pytest.approx(ref, rel=0.01)

    def test_full_occluder_blocks(self):
        shield = plate(0.5, 1, lo=(-1, -1), hi=(2, 2))
        vf = view_factors([plate(0, 1), plate(1, -1), shield])
        assert vf.F[0, 1] == 0.0
        assert vf.F[1, 0] == 0.0

    def test_partial_occluder_vs_monte_carlo(self):
        a, b = plate(0, 1, hi=(4, 4)), plate(4, -1, hi=(4, 4))
        box = np.array([[1.0, -1.0, 1.5, 2.0, 5.0, 2.5]])
        vf = view_factors([a, b], occluders=box, spacing=0.25, max_samples=16)
        ref = oracles.monte_carlo_af(([0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0, 1]),
                                     ([0, 0, 4], [4, 0, 0], [0, 4, 0], [0, 0, -1]), boxes=box)
        assert vf.F[0, 1] * 16 == pytest.approx(ref, rel=0.03)

    def test_back_facing_zero(self):
        vf = view_factors([plate(0, -1), plate(1, -1)])
        assert vf.F[0, 1] == 0.0 and vf.F[1, 0] == 0.0

    def test_enclosure_sums_to_one(self):
        L = 2.0
        faces = [Facet("wall", 0, 1, 0.0, (0, 0), (L, L)), Facet("wall", 0, -1, L, (0, 0), (L, L)),
                 Facet("wall", 1, 1, 0.0, (0, 0), (L, L)), Facet("wall", 1, -1, L, (0, 0), (L, L)),
                 plate(0, 1, hi=(L, L)), plate(L, -1, hi=(L, L))]
        vf = view_factors(faces, occluders=np.zeros((0, 6)))
        assert np.allclose(vf.F.sum(axis=1), 1.0, atol=1e-9)
        assert np.allclose(vf.F_sky, 0.0, atol=1e-9)

    @pytest.mark.parametrize("name", CASES)
    def test_case_reciprocity_and_closure(self, name):
        scene = generate_case(name)
        facets = facetize(scene)
        central = [f for f in facets if f.studied]
        vf = periodic_view_factors(facets, occluder_boxes(scene))
        areas = np.array([f.area for f in central])
        assert vf.reciprocity_error(areas) <= 1e-4
        assert vf.closure_error() <= 1e-3
        assert np.all(vf.F >= 0) and np.all(vf.F_sky >= 0)

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 3), st.integers(0, 3),
                              st.integers(1, 3), st.sampled_from([-1, 1]), st.integers(0, 4)),
                    min_size=2, max_size=5))
    def test_random_reciprocity(self, spec):
        facets = [plate(float(z), s, lo=(x, y), hi=(x + w, y + d)) for x, w, y, d, s, z in spec]
        vf = view_factors(facets)
        areas = np.array([f.area for f in facets])
        assert vf.reciprocity_error(areas) <= 1e-4
        assert vf.closure_error() <= 1e-3


class TestSun:
    def test_noon_altitude(self):
        noon = radiation.solar_noon(date(2014, 1, 3), 7.59, CET)
        s = sun_position(noon, 47.56, 7.59)
        assert s.altitude == pytest.approx(90 - 47.56 + math.degrees(radiation.declination(noon)), abs=0.05)
        assert s.azimuth == pytest.approx(180.0, abs=0.5)

    @pytest.mark.parametrize("hour", [8.5, 10, 12, 13.25, 15, 16.5])
    def test_against_almanac(self, hour):
        t = datetime(2014, 1, 3, tzinfo=CET) + timedelta(hours=hour)
        s = sun_position(t, 47.56, 7.59)
        alt, az = oracles.sun_altitude_azimuth(t, 47.56, 7.59)
        assert s.altitude == pytest.approx(alt, abs=0.3)
        assert s.azimuth == pytest.approx(az, abs=0.5)

    def test_midnight_below_horizon(self):
        assert sun_position(datetime(2014, 1, 3, 0, tzinfo=CET), 47.56, 7.59).altitude < -40

    def test_naive_is_utc(self):
        a = sun_position(datetime(2014, 1, 3, 11), 47.56, 7.59)
        b = sun_position(datetime(2014, 1, 3, 12, tzinfo=CET), 47.56, 7.59)
        assert a.altitude == b.altitude

    def test_direction_consistent(self):
        s = sun_position(datetime(2014, 1, 3, 10, tzinfo=CET), 47.56, 7.59)
        assert np.linalg.norm(s.direction) == pytest.approx(1.0)
        assert math.degrees(math.asin(s.direction[2])) == pytest.approx(s.altitude)
        assert s.direction[0] > 0 and s.direction[1] < 0  # south-east in the morning


class TestShadows:
    def test_open_and_back_facing(self):
        ground = plate(0, 1, hi=(10, 10), kind="ground")
        sun = np.array([0.0, -1.0, 1.0]) / math.sqrt(2)
        assert sunlit_fraction([ground], sun, np.zeros((0, 6)))[0] == pytest.approx(1.0)

    def test_shadow_length(self):
        # wall of height 10 along x at y=0..1; sun from the south at 45 deg shades y in (1, 11)
        box = np.array([[-100.0, 0.0, 0.0, 100.0, 1.0, 10.0]])
        sun = np.array([0.0, -1.0, 1.0]) / math.sqrt(2)
        strip = plate(0, 1, lo=(0, 1), hi=(10, 21), kind="ground")
        f = sunlit_fraction([strip], sun, box, spacing=0.25, max_samples=200)[0]
        assert f == pytest.approx(0.5, abs=0.02)


class TestShortwave:
    def test_isolated_roof(self):
        roof = plate(10, 1, hi=(20, 20), albedo=0.2)
        sun = np.array([0.0, -math.cos(math.radians(20)), math.sin(math.radians(20))])
        sky = SkyModel(400.0, 50.0, 260.0, sun)
        vf = view_factors([roof])
        sw = shortwave([roof], vf, sky, np.zeros((0, 6)))
        assert sw[0] == pytest.approx(0.8 * (400 * math.sin(math.radians(20)) + 50), rel=1e-9)

    def test_night(self):
        roof = plate(10, 1, hi=(20, 20))
        sky = SkyModel(400.0, 0.0, 260.0, np.array([0.0, 1.0, -0.2]))
        assert sky.dni == 0.0
        assert shortwave([roof], view_factors([roof]), sky)[0] == 0.0

    def test_radiosity_two_plates(self):
        F = np.array([[0.0, 0.3], [0.3, 0.0]])
        albedo = np.array([0.5, 0.4])
        src = np.array([100.0, 20.0])
        exact = np.linalg.solve(np.eye(2) - F * albedo[None, :], src)
        assert solve_radiosity(src, albedo, F, tol=1e-12) == pytest.approx(exact, rel=1e-9)

    def test_albedo_one_raises(self):
        with pytest.raises(RadiationError):
            solve_radiosity(np.ones(2), np.ones(2), np.zeros((2, 2)))

    def test_energy_balance(self):
        scene = generate_case("even_open_block")
        facets = facetize(scene)
        central = [f for f in facets if f.studied]
        vf = periodic_view_factors(facets, occluder_boxes(scene))
        s = sun_position(datetime(2014, 1, 3, 12, tzinfo=CET), 47.56, 7.59)
        sky = SkyModel(420.0, 50.0, 258.0, s.direction)
        src = radiation.direct_and_diffuse(central, vf, sky, occluder_boxes(scene))
        absorbed = shortwave(central, vf, sky, occluder_boxes(scene))
        area = np.array([f.area for f in central])
        albedo = np.array([f.albedo for f in central])
        incident = absorbed / (1 - albedo)
        escaped = np.sum(area * albedo * incident * vf.F_sky)
        assert np.sum(area * absorbed) + escaped == pytest.approx(np.sum(area * src), rel=1e-5)


class TestLongwave:
    def test_isolated_roof(self):
        roof = plate(10, 1, hi=(20, 20), emissivity=0.9)
        sky = SkyModel(0, 0, 263.0, UP)
        net = longwave([roof], view_factors([roof]), np.array([283.0]), sky)
        assert net[0] == pytest.approx(0.9 * oracles.SIGMA * (263.0 ** 4 - 283.0 ** 4), rel=1e-12)
        assert net[0] == pytest.approx(-83.1, abs=0.5)

    def test_equilibrium(self):
        scene = generate_case("convex_slabs")
        facets = facetize(scene)
        central = [f for f in facets if f.studied]
        vf = periodic_view_factors(facets, occluder_boxes(scene))
        net = longwave(central, vf, np.full(len(central), 275.0), SkyModel(0, 0, 275.0, UP))
        assert np.max(np.abs(net)) < 1e-9

    def test_exchange_conserves(self):
        facets = [plate(0, 1, hi=(2, 2)), plate(1, -1, hi=(2, 2))]
        vf = view_factors(facets)
        net = longwave(facets, vf, np.array([300.0, 280.0]), SkyModel(0, 0, 0.0, UP))
        sky_loss = 0.9 * oracles.SIGMA * vf.F_sky * np.array([300.0, 280.0]) ** 4
        assert np.sum(4 * (net + sky_loss)) == pytest.approx(0.0, abs=1e-9)


def test_aggregate_zone_flux():
    facets = [Facet("wall", 0, 1, 0.0, (0, 0), (2, 3), zone=0, layer=0),
              Facet("wall", 0, 1, 0.0, (0, 3), (2, 6), zone=1, layer=1),
              plate(6, 1, hi=(2, 2), zone=1, layer=1),
              plate(0, 1, hi=(5, 5), kind="ground", zone=-1, layer=0)]
    phi, layer = aggregate_zone_flux(np.array([10.0, 20.0, 30.0, 99.0]), facets, 2, 2)
    assert phi.tolist() == [60.0, 240.0]
    assert layer.tolist() == [60.0, 240.0]
