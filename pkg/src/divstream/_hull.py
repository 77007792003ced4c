"""Exact convex hull measures for small 2-d and 3-d point sets.

These kernels sit in the innermost loop of the online sampler (K hull
evaluations per frame), so they work on plain float64 arrays in a shape
numba can compile. When numba is importable the public names are
jit-compiled at import time; set DIVSTREAM_NO_JIT=1 to force the pure
Python versions (same arithmetic, much slower).

Degeneracy handling: collinearity and coplanarity tests use a relative
epsilon of 1e-12 scaled by the point set's bounding-box diagonal, and a
measure that falls below the matching tolerance is reported as exactly
0.0.
"""

import os

import numpy as np

REL_EPS = 1e-12


def _hull_area_2d_py(pts):
    # Andrew monotone chain, then the shoelace sum over the hull cycle.
    n = pts.shape[0]
    if n < 3:
        return 0.0
    minx = pts[0, 0]
    maxx = pts[0, 0]
    miny = pts[0, 1]
    maxy = pts[0, 1]
    for i in range(1, n):
        x = pts[i, 0]
        y = pts[i, 1]
        if x < minx:
            minx = x
        if x > maxx:
            maxx = x
        if y < miny:
            miny = y
        if y > maxy:
            maxy = y
    dx = maxx - minx
    dy = maxy - miny
    diag2 = dx * dx + dy * dy
    if diag2 <= 0.0:
        return 0.0
    # cross products and areas both carry units of length^2
    tol = REL_EPS * diag2

    order = np.empty(n, np.int64)
    for i in range(n):
        order[i] = i
    # lexicographic insertion sort on (x, y); point counts here are tiny
    for i in range(1, n):
        key = order[i]
        kx = pts[key, 0]
        ky = pts[key, 1]
        j = i - 1
        while j >= 0:
            o = order[j]
            if pts[o, 0] > kx or (pts[o, 0] == kx and pts[o, 1] > ky):
                order[j + 1] = o
                j -= 1
            else:
                break
        order[j + 1] = key

    hull = np.empty(2 * n + 1, np.int64)
    m = 0
    for ii in range(n):
        i = order[ii]
        while m >= 2:
            a = hull[m - 2]
            b = hull[m - 1]
            cr = (pts[b, 0] - pts[a, 0]) * (pts[i, 1] - pts[a, 1]) - (
                pts[b, 1] - pts[a, 1]
            ) * (pts[i, 0] - pts[a, 0])
            if cr <= tol:
                m -= 1
            else:
                break
        hull[m] = i
        m += 1
    lower = m + 1
    for ii in range(n - 2, -1, -1):
        i = order[ii]
        while m >= lower:
            a = hull[m - 2]
            b = hull[m - 1]
            cr = (pts[b, 0] - pts[a, 0]) * (pts[i, 1] - pts[a, 1]) - (
                pts[b, 1] - pts[a, 1]
            ) * (pts[i, 0] - pts[a, 0])
            if cr <= tol:
                m -= 1
            else:
                break
        hull[m] = i
        m += 1

    # hull[m-1] closes the cycle back onto hull[0]
    if m < 4:
        return 0.0
    s = 0.0
    for j in range(m - 1):
        a = hull[j]
        b = hull[j + 1]
        s += pts[a, 0] * pts[b, 1] - pts[b, 0] * pts[a, 1]
    area = 0.5 * abs(s)
    if area <= tol:
        return 0.0
    return area


def _push_facet_py(pts, tri, nrm, off, alive, nfac, a, b, c, ix, iy, iz, area_tol):
    # Store facet (a, b, c) with a unit normal oriented away from the
    # interior point (ix, iy, iz). Returns the new facet count;
    # sub-tolerance slivers are dropped.
    e1x = pts[b, 0] - pts[a, 0]
    e1y = pts[b, 1] - pts[a, 1]
    e1z = pts[b, 2] - pts[a, 2]
    e2x = pts[c, 0] - pts[a, 0]
    e2y = pts[c, 1] - pts[a, 1]
    e2z = pts[c, 2] - pts[a, 2]
    nx = e1y * e2z - e1z * e2y
    ny = e1z * e2x - e1x * e2z
    nz = e1x * e2y - e1y * e2x
    ln = (nx * nx + ny * ny + nz * nz) ** 0.5
    if ln <= area_tol:
        return nfac
    nx /= ln
    ny /= ln
    nz /= ln
    o = nx * pts[a, 0] + ny * pts[a, 1] + nz * pts[a, 2]
    if nx * ix + ny * iy + nz * iz - o > 0.0:
        t = b
        b = c
        c = t
        nx = -nx
        ny = -ny
        nz = -nz
        o = -o
    tri[nfac, 0] = a
    tri[nfac, 1] = b
    tri[nfac, 2] = c
    nrm[nfac, 0] = nx
    nrm[nfac, 1] = ny
    nrm[nfac, 2] = nz
    off[nfac] = o
    alive[nfac] = 1
    return nfac + 1


def _hull_volume_3d_py(pts):
    # Incremental facet construction: start from an extreme tetrahedron,
    # insert each remaining point by deleting the facets it sees and
    # coning new facets over the horizon edges, then sum signed
    # tetrahedra against a fixed interior point.
    n = pts.shape[0]
    if n < 4:
        return 0.0
    minx = pts[0, 0]
    maxx = pts[0, 0]
    miny = pts[0, 1]
    maxy = pts[0, 1]
    minz = pts[0, 2]
    maxz = pts[0, 2]
    for i in range(1, n):
        if pts[i, 0] < minx:
            minx = pts[i, 0]
        if pts[i, 0] > maxx:
            maxx = pts[i, 0]
        if pts[i, 1] < miny:
            miny = pts[i, 1]
        if pts[i, 1] > maxy:
            maxy = pts[i, 1]
        if pts[i, 2] < minz:
            minz = pts[i, 2]
        if pts[i, 2] > maxz:
            maxz = pts[i, 2]
    dx = maxx - minx
    dy = maxy - miny
    dz = maxz - minz
    diag = (dx * dx + dy * dy + dz * dz) ** 0.5
    if diag <= 0.0:
        return 0.0
    eps = REL_EPS * diag          # point-to-plane distances
    area_tol = eps * diag         # cross-product magnitudes (length^2)
    vol_tol = area_tol * diag     # volumes (length^3)

    # initial simplex from extremes; every argmax below breaks ties by
    # keeping the lowest index, so construction is deterministic
    i0 = 0
    for i in range(1, n):
        if (
            pts[i, 0] < pts[i0, 0]
            or (pts[i, 0] == pts[i0, 0] and pts[i, 1] < pts[i0, 1])
            or (
                pts[i, 0] == pts[i0, 0]
                and pts[i, 1] == pts[i0, 1]
                and pts[i, 2] < pts[i0, 2]
            )
        ):
            i0 = i
    i1 = -1
    best = 0.0
    for i in range(n):
        ddx = pts[i, 0] - pts[i0, 0]
        ddy = pts[i, 1] - pts[i0, 1]
        ddz = pts[i, 2] - pts[i0, 2]
        d2 = ddx * ddx + ddy * ddy + ddz * ddz
        if d2 > best:
            best = d2
            i1 = i
    if i1 < 0 or best**0.5 <= eps:
        return 0.0
    e1x = pts[i1, 0] - pts[i0, 0]
    e1y = pts[i1, 1] - pts[i0, 1]
    e1z = pts[i1, 2] - pts[i0, 2]
    i2 = -1
    best = 0.0
    for i in range(n):
        vx = pts[i, 0] - pts[i0, 0]
        vy = pts[i, 1] - pts[i0, 1]
        vz = pts[i, 2] - pts[i0, 2]
        cx = e1y * vz - e1z * vy
        cy = e1z * vx - e1x * vz
        cz = e1x * vy - e1y * vx
        c2 = cx * cx + cy * cy + cz * cz
        if c2 > best:
            best = c2
            i2 = i
    if i2 < 0 or best**0.5 <= area_tol:
        return 0.0
    e2x = pts[i2, 0] - pts[i0, 0]
    e2y = pts[i2, 1] - pts[i0, 1]
    e2z = pts[i2, 2] - pts[i0, 2]
    nx0 = e1y * e2z - e1z * e2y
    ny0 = e1z * e2x - e1x * e2z
    nz0 = e1x * e2y - e1y * e2x
    ln0 = (nx0 * nx0 + ny0 * ny0 + nz0 * nz0) ** 0.5
    i3 = -1
    best = 0.0
    for i in range(n):
        vx = pts[i, 0] - pts[i0, 0]
        vy = pts[i, 1] - pts[i0, 1]
        vz = pts[i, 2] - pts[i0, 2]
        h = abs(nx0 * vx + ny0 * vy + nz0 * vz)
        if h > best:
            best = h
            i3 = i
    if i3 < 0 or best / ln0 <= eps:
        return 0.0

    ix = (pts[i0, 0] + pts[i1, 0] + pts[i2, 0] + pts[i3, 0]) * 0.25
    iy = (pts[i0, 1] + pts[i1, 1] + pts[i2, 1] + pts[i3, 1]) * 0.25
    iz = (pts[i0, 2] + pts[i1, 2] + pts[i2, 2] + pts[i3, 2]) * 0.25

    cap = 8 * n + 64
    tri = np.empty((cap, 3), np.int64)
    nrm = np.empty((cap, 3), np.float64)
    off = np.empty(cap, np.float64)
    alive = np.zeros(cap, np.uint8)
    nfac = 0
    nfac = _push_facet(pts, tri, nrm, off, alive, nfac, i0, i1, i2, ix, iy, iz, area_tol)
    nfac = _push_facet(pts, tri, nrm, off, alive, nfac, i0, i1, i3, ix, iy, iz, area_tol)
    nfac = _push_facet(pts, tri, nrm, off, alive, nfac, i0, i2, i3, ix, iy, iz, area_tol)
    nfac = _push_facet(pts, tri, nrm, off, alive, nfac, i1, i2, i3, ix, iy, iz, area_tol)

    visbuf = np.empty(cap, np.int64)
    for ip in range(n):
        if ip == i0 or ip == i1 or ip == i2 or ip == i3:
            continue
        px = pts[ip, 0]
        py = pts[ip, 1]
        pz = pts[ip, 2]
        nvis = 0
        for f in range(nfac):
            if alive[f] == 1:
                if nrm[f, 0] * px + nrm[f, 1] * py + nrm[f, 2] * pz - off[f] > eps:
                    visbuf[nvis] = f
                    nvis += 1
        if nvis == 0:
            continue
        ne = 3 * nvis
        ea = np.empty(ne, np.int64)
        eb = np.empty(ne, np.int64)
        for t in range(nvis):
            f = visbuf[t]
            ea[3 * t] = tri[f, 0]
            eb[3 * t] = tri[f, 1]
            ea[3 * t + 1] = tri[f, 1]
            eb[3 * t + 1] = tri[f, 2]
            ea[3 * t + 2] = tri[f, 2]
            eb[3 * t + 2] = tri[f, 0]
            alive[f] = 0
        # horizon edges are those whose reversed twin was not deleted;
        # each one gets a new facet coned to the inserted point
        nh = 0
        for e in range(ne):
            rev = False
            for e2 in range(ne):
                if ea[e2] == eb[e] and eb[e2] == ea[e]:
                    rev = True
                    break
            if not rev:
                nh += 1
        if nfac + nh > cap:
            newcap = 2 * cap + nh
            tri2 = np.empty((newcap, 3), np.int64)
            nrm2 = np.empty((newcap, 3), np.float64)
            off2 = np.empty(newcap, np.float64)
            alive2 = np.zeros(newcap, np.uint8)
            tri2[:cap] = tri
            nrm2[:cap] = nrm
            off2[:cap] = off
            alive2[:cap] = alive
            tri = tri2
            nrm = nrm2
            off = off2
            alive = alive2
            visbuf = np.empty(newcap, np.int64)
            cap = newcap
        for e in range(ne):
            rev = False
            for e2 in range(ne):
                if ea[e2] == eb[e] and eb[e2] == ea[e]:
                    rev = True
                    break
            if not rev:
                nfac = _push_facet(
                    pts, tri, nrm, off, alive, nfac, ea[e], eb[e], ip, ix, iy, iz, area_tol
                )

    vol6 = 0.0
    for f in range(nfac):
        if alive[f] == 1:
            a = tri[f, 0]
            b = tri[f, 1]
            c = tri[f, 2]
            ax = pts[a, 0] - ix
            ay = pts[a, 1] - iy
            az = pts[a, 2] - iz
            bx = pts[b, 0] - ix
            by = pts[b, 1] - iy
            bz = pts[b, 2] - iz
            cx = pts[c, 0] - ix
            cy = pts[c, 1] - iy
            cz = pts[c, 2] - iz
            vol6 += ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (
                bx * cy - by * cx
            )
    vol = vol6 / 6.0
    if vol <= vol_tol:
        return 0.0
    return vol


def _jit_enabled() -> bool:
    flag = os.environ.get("DIVSTREAM_NO_JIT", "").strip().lower()
    return flag not in ("1", "true", "yes")


if _jit_enabled():
    try:
        from numba import njit

        _push_facet = njit(cache=True)(_push_facet_py)
        hull_area_2d = njit(cache=True)(_hull_area_2d_py)
        hull_volume_3d = njit(cache=True)(_hull_volume_3d_py)
        JIT_ACTIVE = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _push_facet = _push_facet_py
        hull_area_2d = _hull_area_2d_py
        hull_volume_3d = _hull_volume_3d_py
        JIT_ACTIVE = False
else:
    _push_facet = _push_facet_py
    hull_area_2d = _hull_area_2d_py
    hull_volume_3d = _hull_volume_3d_py
    JIT_ACTIVE = False
