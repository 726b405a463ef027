"""Numba kernels for view factors and shadow tests on axis-aligned rectangles.

Unoccluded exchange factors ``A_i F_ij`` use the closed forms for parallel
and perpendicular rectangles (superposition over corner functions). Occlusion
is applied as a visibility fraction weighted by the point-to-point kernel on
sample grids of both rectangles; the weights and the segment test are
symmetric, so ``A_i F_ij = A_j F_ji`` holds to round-off.
"""

import math

import numpy as np
from numba import njit

INV_2PI = 1.0 / (2.0 * math.pi)
EPS = 1e-6


@njit(cache=True)
def _xlogy(a, b):
    if a == 0.0:
        return 0.0
    return a * math.log(b)


@njit(cache=True)
def _g_parallel(x, y, c):
    a = math.sqrt(y * y + c * c)
    b = math.sqrt(x * x + c * c)
    t = 0.0
    if a > 0.0:
        t += x * a * math.atan2(x, a)
    if b > 0.0:
        t += y * b * math.atan2(y, b)
    return t - 0.5 * _xlogy(c * c, x * x + y * y + c * c)


@njit(cache=True)
def _g_perpendicular(x, d, z):
    r2 = x * x + z * z
    r = math.sqrt(r2)
    t = 0.0
    if r > 0.0:
        t = d * r * math.atan2(d, r)
    s = r2 + d * d
    if s > 0.0:
        t -= 0.25 * _xlogy(r2 - d * d, s)
    return t


@njit(cache=True)
def parallel_af(x1, x2, y1, y2, e1, e2, n1, n2, c):
    """A1*F12 for coaxial-plane rectangles separated by distance c."""
    xs = (x1, x2)
    ys = (y1, y2)
    es = (e1, e2)
    ns = (n1, n2)
    s = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    sgn = 1.0 if (i + j + k + l) % 2 == 0 else -1.0
                    s += sgn * _g_parallel(xs[i] - es[k], ys[j] - ns[l], c)
    return s * INV_2PI


@njit(cache=True)
def perpendicular_af(x1, x2, y1, y2, e1, e2, z1, z2):
    """A1*F12; rect 1 in z=0 (x>=0 side), rect 2 in x=0 (z>=0), common axis y."""
    xs = (x1, x2)
    ys = (y1, y2)
    es = (e1, e2)
    zs = (z1, z2)
    s = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    sgn = 1.0 if (i + j + k + l) % 2 == 0 else -1.0
                    s += sgn * _g_perpendicular(xs[i], ys[j] - es[k], zs[l])
    return s * INV_2PI


@njit(cache=True)
def _bounds(axis, plane, lo, hi, out_lo, out_hi):
    if axis == 0:
        a, b = 1, 2
    elif axis == 1:
        a, b = 0, 2
    else:
        a, b = 0, 1
    out_lo[axis] = plane
    out_hi[axis] = plane
    out_lo[a] = lo[0]
    out_hi[a] = hi[0]
    out_lo[b] = lo[1]
    out_hi[b] = hi[1]


@njit(cache=True)
def pair_af(ai, si, pi, bi_lo, bi_hi, aj, sj, pj, bj_lo, bj_hi, ci_lo, ci_hi, cj_lo, cj_hi):
    """Unoccluded A_i F_ij; writes the mutually visible (clipped) parts.

    ``b*_lo/hi`` are 3D bounds; returns 0 when the rectangles cannot see
    each other.
    """
    for k in range(3):
        ci_lo[k] = bi_lo[k]
        ci_hi[k] = bi_hi[k]
        cj_lo[k] = bj_lo[k]
        cj_hi[k] = bj_hi[k]
    if ai == aj:
        d = pj - pi
        if si * d <= EPS or sj * d >= -EPS:
            return 0.0
        c = abs(d)
        if ai == 0:
            a, b = 1, 2
        elif ai == 1:
            a, b = 0, 2
        else:
            a, b = 0, 1
        return parallel_af(bi_lo[a], bi_hi[a], bi_lo[b], bi_hi[b],
                           bj_lo[a], bj_hi[a], bj_lo[b], bj_hi[b], c)
    # clip each rectangle to the front half-space of the other's plane
    if sj > 0:
        ci_lo[aj] = max(ci_lo[aj], pj)
    else:
        ci_hi[aj] = min(ci_hi[aj], pj)
    if si > 0:
        cj_lo[ai] = max(cj_lo[ai], pi)
    else:
        cj_hi[ai] = min(cj_hi[ai], pi)
    if ci_hi[aj] - ci_lo[aj] <= EPS or cj_hi[ai] - cj_lo[ai] <= EPS:
        return 0.0
    cax = 3 - ai - aj
    # distance of rect i from plane j, and of rect j from plane i
    x1 = sj * (ci_lo[aj] - pj)
    x2 = sj * (ci_hi[aj] - pj)
    if x1 > x2:
        x1, x2 = x2, x1
    z1 = si * (cj_lo[ai] - pi)
    z2 = si * (cj_hi[ai] - pi)
    if z1 > z2:
        z1, z2 = z2, z1
    return perpendicular_af(x1, x2, ci_lo[cax], ci_hi[cax], cj_lo[cax], cj_hi[cax], z1, z2)


@njit(cache=True)
def _segment_blocked(px, py, pz, qx, qy, qz, boxes, cand, ncand):
    d = (qx - px, qy - py, qz - pz)
    o = (px, py, pz)
    for m in range(ncand):
        k = cand[m]
        t0 = 1e-9
        t1 = 1.0 - 1e-9
        planar = False
        hit = True
        for ax in range(3):
            lo = boxes[k, ax]
            hi = boxes[k, ax + 3]
            if hi - lo > 4.0 * EPS:
                lo += EPS
                hi -= EPS
            else:
                planar = True
            if abs(d[ax]) < 1e-15:
                if o[ax] < lo or o[ax] > hi:
                    hit = False
                    break
            else:
                ta = (lo - o[ax]) / d[ax]
                tb = (hi - o[ax]) / d[ax]
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
        if not hit:
            continue
        if planar:
            if t0 <= t1:
                return True
        elif t0 < t1:
            return True
    return False


@njit(cache=True)
def _ray_blocked(o, d, boxes):
    for k in range(boxes.shape[0]):
        t0 = 1e-9
        t1 = 1e300
        planar = False
        hit = True
        for ax in range(3):
            lo = boxes[k, ax]
            hi = boxes[k, ax + 3]
            if hi - lo > 4.0 * EPS:
                lo += EPS
                hi -= EPS
            else:
                planar = True
            if abs(d[ax]) < 1e-15:
                if o[ax] < lo or o[ax] > hi:
                    hit = False
                    break
            else:
                ta = (lo - o[ax]) / d[ax]
                tb = (hi - o[ax]) / d[ax]
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
        if not hit:
            continue
        if planar:
            if t0 <= t1:
                return True
        elif t0 < t1:
            return True
    return False


@njit(cache=True)
def _n_samples(length, spacing, nmax):
    n = int(math.ceil(length / spacing - 1e-9))
    if n < 1:
        n = 1
    if n > nmax:
        n = nmax
    return n


@njit(cache=True)
def _samples(lo, hi, axis, spacing, nmax):
    if axis == 0:
        a, b = 1, 2
    elif axis == 1:
        a, b = 0, 2
    else:
        a, b = 0, 1
    na = _n_samples(hi[a] - lo[a], spacing, nmax)
    nb = _n_samples(hi[b] - lo[b], spacing, nmax)
    pts = np.empty((na * nb, 3))
    m = 0
    for i in range(na):
        for j in range(nb):
            pts[m, axis] = lo[axis]
            pts[m, a] = lo[a] + (i + 0.5) * (hi[a] - lo[a]) / na
            pts[m, b] = lo[b] + (j + 0.5) * (hi[b] - lo[b]) / nb
            m += 1
    return pts


@njit(cache=True)
def _visibility(ai, si, aj, sj, ci_lo, ci_hi, cj_lo, cj_hi, boxes, cand, ncand, spacing, nmax):
    pi = _samples(ci_lo, ci_hi, ai, spacing, nmax)
    pj = _samples(cj_lo, cj_hi, aj, spacing, nmax)
    wsum = 0.0
    vsum = 0.0
    for p in range(pi.shape[0]):
        for q in range(pj.shape[0]):
            dx = pj[q, 0] - pi[p, 0]
            dy = pj[q, 1] - pi[p, 1]
            dz = pj[q, 2] - pi[p, 2]
            dv = (dx, dy, dz)
            r2 = dx * dx + dy * dy + dz * dz
            cos_i = si * dv[ai]
            cos_j = -sj * dv[aj]
            if cos_i <= 0.0 or cos_j <= 0.0 or r2 <= 0.0:
                continue
            w = cos_i * cos_j / (r2 * r2)
            wsum += w
            if not _segment_blocked(pi[p, 0], pi[p, 1], pi[p, 2], pj[q, 0], pj[q, 1], pj[q, 2],
                                    boxes, cand, ncand):
                vsum += w
    if wsum <= 0.0:
        return 1.0
    return vsum / wsum


@njit(cache=True)
def exchange_rows(rows, axis, sign, plane, lo, hi, boxes, spacing, nmax):
    """Matrix of A_i F_ij for i in ``rows`` and all j (occlusion included)."""
    n = axis.shape[0]
    out = np.zeros((rows.shape[0], n))
    bi_lo = np.empty(3)
    bi_hi = np.empty(3)
    bj_lo = np.empty(3)
    bj_hi = np.empty(3)
    ci_lo = np.empty(3)
    ci_hi = np.empty(3)
    cj_lo = np.empty(3)
    cj_hi = np.empty(3)
    cand = np.empty(boxes.shape[0], dtype=np.int64)
    for r in range(rows.shape[0]):
        i = rows[r]
        _bounds(axis[i], plane[i], lo[i], hi[i], bi_lo, bi_hi)
        for j in range(n):
            if j == i:
                continue
            _bounds(axis[j], plane[j], lo[j], hi[j], bj_lo, bj_hi)
            af = pair_af(axis[i], sign[i], plane[i], bi_lo, bi_hi,
                         axis[j], sign[j], plane[j], bj_lo, bj_hi,
                         ci_lo, ci_hi, cj_lo, cj_hi)
            if af <= 0.0:
                continue
            # candidate occluders: boxes overlapping the pair's bounding box
            ncand = 0
            for k in range(boxes.shape[0]):
                ok = True
                for ax in range(3):
                    blo = min(ci_lo[ax], cj_lo[ax])
                    bhi = max(ci_hi[ax], cj_hi[ax])
                    klo = boxes[k, ax]
                    khi = boxes[k, ax + 3]
                    if khi - klo > 4.0 * EPS:
                        klo += EPS
                        khi -= EPS
                    if khi < blo or klo > bhi:
                        ok = False
                        break
                if ok:
                    cand[ncand] = k
                    ncand += 1
            if ncand > 0:
                af *= _visibility(axis[i], sign[i], axis[j], sign[j], ci_lo, ci_hi, cj_lo, cj_hi,
                                  boxes, cand, ncand, spacing, nmax)
            out[r, j] = af
    return out


@njit(cache=True)
def sunlit_fraction(rows, axis, sign, plane, lo, hi, sun, boxes, spacing, nmax):
    """Fraction of sample points on each facet with an unobstructed sun ray."""
    out = np.zeros(rows.shape[0])
    b_lo = np.empty(3)
    b_hi = np.empty(3)
    o = np.empty(3)
    for r in range(rows.shape[0]):
        i = rows[r]
        if sign[i] * sun[axis[i]] <= 0.0:
            continue
        _bounds(axis[i], plane[i], lo[i], hi[i], b_lo, b_hi)
        if axis[i] == 0:
            a, b = 1, 2
        elif axis[i] == 1:
            a, b = 0, 2
        else:
            a, b = 0, 1
        la = b_hi[a] - b_lo[a]
        lb = b_hi[b] - b_lo[b]
        na = _n_samples(la, spacing, nmax)
        nb = _n_samples(lb, spacing, nmax)
        lit = 0
        total = 0
        if na == 1 and nb == 1:
            # centroid plus four corner-offset points
            offs = ((0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75))
            for m in range(5):
                o[axis[i]] = plane[i] + sign[i] * 1e-7
                o[a] = b_lo[a] + offs[m][0] * la
                o[b] = b_lo[b] + offs[m][1] * lb
                total += 1
                if not _ray_blocked(o, sun, boxes):
                    lit += 1
        else:
            for p in range(na):
                for q in range(nb):
                    o[axis[i]] = plane[i] + sign[i] * 1e-7
                    o[a] = b_lo[a] + (p + 0.5) * la / na
                    o[b] = b_lo[b] + (q + 0.5) * lb / nb
                    total += 1
                    if not _ray_blocked(o, sun, boxes):
                        lit += 1
        out[r] = lit / total
    return out
