"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical code; formulas are written
from textbook closed forms or straight from the model equations.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone

import numpy as np

SIGMA = 5.670374419e-8


# --- view factors -------------------------------------------------------------

def opposed_rectangles(a: float, b: float, c: float) -> float:
    """F between directly opposed parallel a x b rectangles a distance c apart."""
    x, y = a / c, b / c
    return (2.0 / (math.pi * x * y)) * (
        math.log(math.sqrt((1 + x * x) * (1 + y * y) / (1 + x * x + y * y)))
        + x * math.sqrt(1 + y * y) * math.atan(x / math.sqrt(1 + y * y))
        + y * math.sqrt(1 + x * x) * math.atan(y / math.sqrt(1 + x * x))
        - x * math.atan(x) - y * math.atan(y))


def perpendicular_common_edge(h: float, w: float, l: float) -> float:
    """F from a w x l rectangle to an h x l rectangle sharing the l edge at 90 degrees."""
    H, W = h / l, w / l
    a = (1 + W * W) * (1 + H * H) / (1 + W * W + H * H)
    b = W * W * (1 + W * W + H * H) / ((1 + W * W) * (W * W + H * H))
    c = H * H * (1 + H * H + W * W) / ((1 + H * H) * (H * H + W * W))
    return (1.0 / (math.pi * W)) * (
        W * math.atan(1 / W) + H * math.atan(1 / H)
        - math.sqrt(H * H + W * W) * math.atan(1 / math.sqrt(H * H + W * W))
        + 0.25 * math.log(a * b ** (W * W) * c ** (H * H)))


def _sample_rect(origin, e1, e2, n, rng):
    u = rng.random((n, 1))
    v = rng.random((n, 1))
    return origin + u * e1 + v * e2


def _blocked(p, q, boxes):
    """Segments p->q (n, 3) hitting the interior of any box (m, 6)."""
    hit = np.zeros(len(p), dtype=bool)
    d = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        for box in boxes:
            lo, hi = box[:3], box[3:]
            t0 = np.full(len(p), -np.inf)
            t1 = np.full(len(p), np.inf)
            inside = np.ones(len(p), dtype=bool)
            for ax in range(3):
                par = np.abs(d[:, ax]) < 1e-15
                inside &= ~par | ((p[:, ax] > lo[ax]) & (p[:, ax] < hi[ax]))
                ta = (lo[ax] - p[:, ax]) / d[:, ax]
                tb = (hi[ax] - p[:, ax]) / d[:, ax]
                t0 = np.where(par, t0, np.maximum(t0, np.minimum(ta, tb)))
                t1 = np.where(par, t1, np.minimum(t1, np.maximum(ta, tb)))
            hit |= inside & (t0 < t1) & (t1 > 1e-9) & (t0 < 1 - 1e-9)
    return hit


def monte_carlo_af(r1, r2, boxes=(), n=400_000, seed=0) -> float:
    """A1 F12 by uniform sampling of both rectangles.

    Each rectangle is (origin, edge1, edge2, unit normal).
    """
    rng = np.random.default_rng(seed)
    o1, a1, b1, n1 = (np.asarray(v, float) for v in r1)
    o2, a2, b2, n2 = (np.asarray(v, float) for v in r2)
    p = _sample_rect(o1, a1, b1, n, rng)
    q = _sample_rect(o2, a2, b2, n, rng)
    d = q - p
    r2_ = np.einsum("ij,ij->i", d, d)
    c1 = np.clip(d @ n1, 0, None)
    c2 = np.clip(-(d @ n2), 0, None)
    k = c1 * c2 / (math.pi * r2_ * r2_)
    if len(boxes):
        k[_blocked(p, q, np.asarray(boxes, float))] = 0.0
    area1 = np.linalg.norm(np.cross(a1, b1))
    area2 = np.linalg.norm(np.cross(a2, b2))
    return float(k.mean() * area1 * area2)


# --- sun ------------------------------------------------------------------------

def sun_altitude_azimuth(when: datetime, lat: float, lon: float) -> tuple[float, float]:
    """Low-precision almanac algorithm (ecliptic longitude, sidereal time)."""
    t = when.astimezone(timezone.utc)
    jd = t.timestamp() / 86400.0 + 2440587.5
    n = jd - 2451545.0
    L = math.radians((280.460 + 0.9856474 * n) % 360)
    g = math.radians((357.528 + 0.9856003 * n) % 360)
    lam = L + math.radians(1.915) * math.sin(g) + math.radians(0.020) * math.sin(2 * g)
    eps = math.radians(23.439 - 0.0000004 * n)
    ra = math.atan2(math.cos(eps) * math.sin(lam), math.cos(lam))
    dec = math.asin(math.sin(eps) * math.sin(lam))
    gmst = (18.697374558 + 24.06570982441908 * n) % 24
    ha = math.radians(gmst * 15 + lon) - ra
    phi = math.radians(lat)
    alt = math.asin(math.sin(phi) * math.sin(dec) + math.cos(phi) * math.cos(dec) * math.cos(ha))
    az = math.atan2(-math.sin(ha) * math.cos(dec),
                    math.cos(phi) * math.sin(dec) - math.sin(phi) * math.cos(dec) * math.cos(ha))
    return math.degrees(alt), math.degrees(az) % 360


# --- canopy ----------------------------------------------------------------------

def canopy_rhs(theta, S_c, S_r, dz, k_max, h_max, sources, rho_cp, pinned_top=True):
    """Layer tendencies written from the porosity form of the interface area.

    ``S_r[k]`` is the roof area at the top interface of layer k.
    """
    n = len(theta)
    out = np.zeros(n)
    for k in range(n - 1):
        z = (k + 1) * dz
        K = k_max * math.exp(0.5) * (z / h_max) * math.exp(-0.5 * (z / h_max) ** 2)
        area = S_c[k + 1] * (1.0 - S_r[k] / S_c[k + 1])
        flow = rho_cp * area * K * (theta[k] - theta[k + 1]) / dz
        out[k] -= flow
        out[k + 1] += flow
    out += sources
    out /= rho_cp * np.asarray(S_c) * dz
    if pinned_top:
        out[-1] = 0.0
    return out


def rk4(f, y0, t_end, h):
    y = np.array(y0, dtype=float)
    steps = int(round(t_end / h))
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


# --- zone -------------------------------------------------------------------------

def control(T_a, t_targ=292.15, q_min=-100.0, q_max=100.0):
    if T_a <= t_targ - 2:
        return q_max
    if T_a >= t_targ + 2:
        return q_min
    return q_max + (q_min - q_max) * (T_a - (t_targ - 2)) / 4.0


def zone_rhs(p: dict, theta_k, theta_k1, phi):
    """RHS of the two-node zone written from its energy balances."""
    A, Sw, Sr = p["floor_area"], p["wall_area"], p["roof_area"]
    K_ext, K_r = p["k_ext"] * Sw, p["k_r"] * Sr
    K_int, K_vent = p["k_int"] * (Sw + Sr), p["k_vent"] * A
    phi_a = p["eta"] * phi
    phi_w = phi * (1 - p["eta"]) * p["k_ext"] / p["h_conv"]

    def f(y):
        T_w, T_a = y
        q = control(T_a, p["t_targ"], p["q_c_min"], p["q_c_max"]) * A
        dw = (K_int * (T_a - T_w) + K_ext * (theta_k - T_w) + K_r * (theta_k1 - T_w) + phi_w)
        da = (K_int * (T_w - T_a) + K_vent * (theta_k - T_a) + q + p["q_a"] * A + phi_a)
        return np.array([dw / (p["c_w"] * A), da / (p["c_a"] * A)])
    return f
