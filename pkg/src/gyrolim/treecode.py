"""Barnes-Hut quadtree for the equal-weight Coulomb force.

Particles are sorted by Morton code; every node owns a contiguous range of the
sorted array and is split on the next pair of code bits. A node of side ``s``
at distance ``r`` from the target is replaced by its centre of mass when
``s / r < theta``. Monopole only, so the relative force error is O(theta^2)
for well-separated cells. Intended for N well above 1e5; the direct sum is
the reference.
"""

import math

import numba as nb
import numpy as np

TWO_PI = 2.0 * math.pi
LEVELS = 16
LEAF = 8


@nb.njit(cache=True)
def _spread(v):
    v = v & 0xFFFF
    v = (v | (v << 8)) & 0x00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F
    v = (v | (v << 2)) & 0x33333333
    v = (v | (v << 1)) & 0x55555555
    return v


@nb.njit(cache=True)
def _build(codes, x, y, x0, y0, side):
    n = codes.shape[0]
    cap = 4 * n + 8
    lo = np.empty(cap, np.int64)
    hi = np.empty(cap, np.int64)
    level = np.empty(cap, np.int64)
    child = -np.ones((cap, 4), np.int64)
    cx = np.zeros(cap)
    cy = np.zeros(cap)
    size = np.zeros(cap)
    lo[0] = 0
    hi[0] = n
    level[0] = 0
    count = 1
    stack = np.empty(cap, np.int64)
    top = 0
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        k = stack[top]
        a = lo[k]
        b = hi[k]
        sx = 0.0
        sy = 0.0
        for i in range(a, b):
            sx += x[i]
            sy += y[i]
        cx[k] = sx / (b - a)
        cy[k] = sy / (b - a)
        size[k] = side / (2.0 ** level[k])
        if b - a <= LEAF or level[k] >= LEVELS:
            continue
        shift = 2 * (LEVELS - level[k] - 1)
        start = a
        for q in range(4):
            end = start
            while end < b and ((codes[end] >> shift) & 3) == q:
                end += 1
            if end > start:
                lo[count] = start
                hi[count] = end
                level[count] = level[k] + 1
                child[k, q] = count
                stack[top] = count
                top += 1
                count += 1
            start = end
    return lo[:count], hi[:count], child[:count], cx[:count], cy[:count], size[:count]


@nb.njit(parallel=True, cache=True)
def _traverse(x, y, lo, hi, child, cx, cy, size, theta):
    n = x.shape[0]
    fx = np.zeros(n)
    fy = np.zeros(n)
    dmin = np.empty(n)
    for i in nb.prange(n):
        stack = np.empty(64 * 4, np.int64)
        top = 1
        stack[0] = 0
        sx = 0.0
        sy = 0.0
        m = np.inf
        while top > 0:
            top -= 1
            k = stack[top]
            rx = x[i] - cx[k]
            ry = y[i] - cy[k]
            r2 = rx * rx + ry * ry
            leaf = child[k, 0] < 0 and child[k, 1] < 0 and child[k, 2] < 0 and child[k, 3] < 0
            inside = lo[k] <= i < hi[k]
            if not inside and size[k] * size[k] < theta * theta * r2:
                w = hi[k] - lo[k]
                sx -= w * rx / r2
                sy -= w * ry / r2
            elif leaf:
                for j in range(lo[k], hi[k]):
                    if j == i:
                        continue
                    ax = x[i] - x[j]
                    ay = y[i] - y[j]
                    d2 = ax * ax + ay * ay
                    if d2 < m:
                        m = d2
                    sx -= ax / d2
                    sy -= ay / d2
            else:
                for q in range(4):
                    if child[k, q] >= 0:
                        stack[top] = child[k, q]
                        top += 1
        fx[i] = sx / (TWO_PI * n)
        fy[i] = sy / (TWO_PI * n)
        dmin[i] = m
    return fx, fy, dmin


def coulomb_forces_bh(positions, theta=0.5):
    """Approximate F_i = (1/N) sum_{j != i} grad V(x_i - x_j); returns (F, min squared leaf distance)."""
    p = np.asarray(positions, dtype=float)
    x0, y0 = p.min(axis=0)
    side = float(max(np.ptp(p[:, 0]), np.ptp(p[:, 1]), 1e-300)) * (1 + 1e-12)
    scale = (1 << LEVELS) - 1
    ix = np.minimum(((p[:, 0] - x0) / side * scale).astype(np.int64), scale)
    iy = np.minimum(((p[:, 1] - y0) / side * scale).astype(np.int64), scale)
    codes = (_spread(ix) << 1) | _spread(iy)
    order = np.argsort(codes, kind="stable")
    xs = np.ascontiguousarray(p[order, 0])
    ys = np.ascontiguousarray(p[order, 1])
    lo, hi, child, cx, cy, size = _build(codes[order], xs, ys, x0, y0, side)
    fx, fy, dmin = _traverse(xs, ys, lo, hi, child, cx, cy, size, float(theta))
    F = np.empty_like(p)
    F[order, 0] = fx
    F[order, 1] = fy
    # separation is only checked on directly summed pairs, so it is an upper bound
    return F, float(dmin.min()) if dmin.size else math.inf
