"""Compiled inner loops for the simulator."""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def weighted_assign(users, bs, w_dl, w_ul, cell):
    """Index of the BS minimizing ``w * |x - u|^2`` for every user, both directions.

    BSs are bucketed on a square grid of side ``cell``; rings of buckets are
    scanned outwards until no unvisited BS can beat the current best.
    """
    n = users.shape[0]
    m = bs.shape[0]
    od = np.full(n, -1, np.int64)
    ou = np.full(n, -1, np.int64)
    if m == 0:
        return od, ou
    x0 = bs[:, 0].min()
    y0 = bs[:, 1].min()
    nx = int((bs[:, 0].max() - x0) / cell) + 1
    ny = int((bs[:, 1].max() - y0) / cell) + 1
    cx = np.empty(m, np.int64)
    cy = np.empty(m, np.int64)
    counts = np.zeros(nx * ny + 1, np.int64)
    for j in range(m):
        cx[j] = min(int((bs[j, 0] - x0) / cell), nx - 1)
        cy[j] = min(int((bs[j, 1] - y0) / cell), ny - 1)
        counts[cy[j] * nx + cx[j] + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    order = np.empty(m, np.int64)
    for j in range(m):
        k = cy[j] * nx + cx[j]
        order[fill[k]] = j
        fill[k] += 1
    wmin = min(w_dl.min(), w_ul.min())
    rmax = max(nx, ny)
    for i in range(n):
        ux = users[i, 0]
        uy = users[i, 1]
        ix = int(np.floor((ux - x0) / cell))
        iy = int(np.floor((uy - y0) / cell))
        bd = np.inf
        bu = np.inf
        jd = -1
        ju = -1
        r = 0
        while True:
            for gy in range(iy - r, iy + r + 1):
                if gy < 0 or gy >= ny:
                    continue
                edge_y = gy == iy - r or gy == iy + r
                step = 1 if edge_y else 2 * r
                gx = ix - r
                while gx <= ix + r:
                    if 0 <= gx < nx:
                        k = gy * nx + gx
                        for t in range(start[k], start[k + 1]):
                            j = order[t]
                            dx = bs[j, 0] - ux
                            dy = bs[j, 1] - uy
                            d = dx * dx + dy * dy
                            vd = d * w_dl[j]
                            vu = d * w_ul[j]
                            if vd < bd:
                                bd = vd
                                jd = j
                            if vu < bu:
                                bu = vu
                                ju = j
                    if step == 0:
                        break
                    gx += step
            # any bucket outside ring r is at least r * cell away
            reach = r * cell
            if (jd >= 0 and ju >= 0 and reach * reach * wmin >= max(bd, bu)) or r > rmax + 2:
                break
            r += 1
        od[i] = jd
        ou[i] = ju
    return od, ou
