"""Compiled O(N^2) pair loops.

Every routine parallelizes over targets only; the inner sum over sources runs
serially in index order, so results are bit-identical for identical inputs
regardless of thread count.
"""

import math

import numba as nb
import numpy as np

# TBB on this class of hosts is often too old; the work-queue layer is always available
nb.config.THREADING_LAYER = "workqueue"

TWO_PI = 2.0 * math.pi


@nb.njit(parallel=True, cache=True)
def coulomb_forces(x, y):
    """F_i = (1/N) sum_{j != i} grad V(x_i - x_j) plus the squared minimum pair distance."""
    n = x.shape[0]
    fx = np.zeros(n)
    fy = np.zeros(n)
    dmin = np.empty(n)
    for i in nb.prange(n):
        sx = 0.0
        sy = 0.0
        m = np.inf
        xi = x[i]
        yi = y[i]
        for j in range(n):
            if j == i:
                continue
            rx = xi - x[j]
            ry = yi - y[j]
            r2 = rx * rx + ry * ry
            if r2 < m:
                m = r2
            if r2 > 0.0:
                sx -= rx / r2
                sy -= ry / r2
        fx[i] = sx / (TWO_PI * n)
        fy[i] = sy / (TWO_PI * n)
        dmin[i] = m
    return fx, fy, dmin.min()


@nb.njit(parallel=True, cache=True)
def log_pair_sums(x, y):
    """Per-particle sums sum_{j != i} log|x_i - x_j|."""
    n = x.shape[0]
    out = np.zeros(n)
    for i in nb.prange(n):
        s = 0.0
        for j in range(n):
            if j == i:
                continue
            rx = x[i] - x[j]
            ry = y[i] - y[j]
            s += 0.5 * math.log(rx * rx + ry * ry)
        out[i] = s
    return out


@nb.njit(parallel=True, cache=True)
def min_pair_distance2(x, y):
    n = x.shape[0]
    dmin = np.full(max(n, 1), np.inf)
    for i in nb.prange(n):
        m = np.inf
        for j in range(n):
            if j == i:
                continue
            rx = x[i] - x[j]
            ry = y[i] - y[j]
            r2 = rx * rx + ry * ry
            if r2 < m:
                m = r2
        dmin[i] = m
    return dmin.min()


@nb.njit(parallel=True, cache=True)
def commutator_pair_sums(x, y, ux, uy):
    """Per-particle sums sum_{j != i} (u_i - u_j) . grad V(x_i - x_j)."""
    n = x.shape[0]
    out = np.zeros(n)
    for i in nb.prange(n):
        s = 0.0
        for j in range(n):
            if j == i:
                continue
            rx = x[i] - x[j]
            ry = y[i] - y[j]
            r2 = rx * rx + ry * ry
            s -= ((ux[i] - ux[j]) * rx + (uy[i] - uy[j]) * ry) / r2
        out[i] = s / TWO_PI
    return out


@nb.njit(parallel=True, cache=True)
def blob_velocity(tx, ty, bx, by, gamma, delta):
    """u(t) = sum_j gamma_j K(t - b_j) (1 - exp(-|t - b_j|^2 / delta^2)); zero at coincidence."""
    m = tx.shape[0]
    ux = np.zeros(m)
    uy = np.zeros(m)
    d2 = delta * delta
    for i in nb.prange(m):
        sx = 0.0
        sy = 0.0
        for j in range(bx.shape[0]):
            rx = tx[i] - bx[j]
            ry = ty[i] - by[j]
            r2 = rx * rx + ry * ry
            if r2 == 0.0:
                continue
            if d2 > 0.0 and r2 < 38.0 * d2:
                # beyond r2 = 38 d2 1 - exp(-r2/d2) rounds to 1.0
                w = gamma[j] * (1.0 - math.exp(-r2 / d2)) / r2
            else:
                w = gamma[j] / r2
            sx -= w * ry
            sy += w * rx
        ux[i] = sx / TWO_PI
        uy[i] = sy / TWO_PI
    return ux, uy


@nb.njit(cache=True)
def deposit_gaussian_blobs(bx, by, gamma, delta, x0, h, n, cutoff):
    """Sample sum_j gamma_j exp(-|x - b_j|^2/delta^2)/(pi delta^2) on cell centres x0 + (i + 1/2) h.

    Serial on purpose: contributions to a cell are accumulated in blob order.
    """
    out = np.zeros((n, n))
    d2 = delta * delta
    norm = 1.0 / (math.pi * d2)
    reach = int(math.ceil(cutoff * delta / h)) + 1
    for j in range(bx.shape[0]):
        ci = int(math.floor((bx[j] - x0) / h))
        cj = int(math.floor((by[j] - x0) / h))
        i_lo = max(ci - reach, 0)
        i_hi = min(ci + reach + 1, n)
        j_lo = max(cj - reach, 0)
        j_hi = min(cj + reach + 1, n)
        g = gamma[j] * norm
        for a in range(i_lo, i_hi):
            px = x0 + (a + 0.5) * h - bx[j]
            for b in range(j_lo, j_hi):
                py = x0 + (b + 0.5) * h - by[j]
                out[a, b] += g * math.exp(-(px * px + py * py) / d2)
    return out
