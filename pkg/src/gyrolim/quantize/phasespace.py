"""Wigner and Husimi transforms on one phase plane (d = 1), with a product form for d = 2.

For an operator with integral kernel k(x, y),

    W(x, xi) = (2 pi)^{-1} int k(x + hbar y/2, x - hbar y/2) e^{-i xi y} dy,

and the Husimi transform is G_{hbar/2} * W (phase-plane Gaussian of covariance
hbar/2), which also equals <z|A|z> / (2 pi hbar).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from gyrolim.kernels import GridError
from gyrolim.quantize.hermite import coherent_overlap, coherent_state


def projector_kernel(q: float, p: float, hbar: float):
    """Integral kernel of |z><z| on the line."""

    def k(x, y):
        return coherent_state([q], [p], hbar, np.asarray(x)[..., None]) * np.conj(
            coherent_state([q], [p], hbar, np.asarray(y)[..., None]))

    return k


def toeplitz_kernel(points, weights, hbar: float):
    """Kernel of (2 pi hbar)^{-1} sum_k w_k |z_k><z_k| on the line; points are (K, 2) as (q, p)."""
    z = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")

    def k(x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        q, p = z[:, 0], z[:, 1]
        amp = np.exp(-((x - q) ** 2 + (y - q) ** 2) / (2 * hbar) + 1j * p * (x - y) / hbar)
        return np.sum(w * amp, axis=-1) / (math.sqrt(math.pi * hbar) * 2 * math.pi * hbar)

    return k


def default_y_grid(hbar: float, xi_max: float, width: float = 14.0):
    """Integration grid for the Wigner integral: span ~ width/sqrt(hbar), step resolving xi_max."""
    span = width / math.sqrt(hbar)
    step = min(0.25, math.pi / (4 * (abs(xi_max) + 1.0)))
    n = int(math.ceil(2 * span / step)) | 1
    return np.linspace(-span, span, n)


def wigner_transform(kernel, x, xi, hbar: float, y=None, block: int = 64) -> np.ndarray:
    """W on the tensor grid x by xi (shape (len(x), len(xi))), trapezoid rule in y."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if y is None:
        y = default_y_grid(hbar, np.max(np.abs(xi)) + 1.0 / math.sqrt(hbar))
    wts = np.full(y.size, y[1] - y[0])
    wts[[0, -1]] *= 0.5
    phase = np.exp(-1j * np.outer(y, xi)) * wts[:, None]
    out = np.empty((x.size, xi.size))
    for a in range(0, x.size, block):
        xs = x[a:a + block, None]
        vals = kernel(xs + hbar * y / 2, xs - hbar * y / 2)
        out[a:a + block] = np.real(vals @ phase) / (2 * math.pi)
    return out


def _check_resolution(x, xi, hbar):
    dx = float(x[1] - x[0])
    dxi = float(xi[1] - xi[0])
    if max(dx, dxi) > math.sqrt(hbar) / 4 + 1e-15:
        raise GridError(f"phase grid spacing {max(dx, dxi):.3g} exceeds sqrt(hbar)/4 = {math.sqrt(hbar) / 4:.3g}")
    return dx, dxi


def phase_gaussian(x, xi, a: float, center=(0.0, 0.0)) -> np.ndarray:
    """G_a on the phase plane (dimension 2, covariance a I)."""
    X, XI = np.meshgrid(np.asarray(x) - center[0], np.asarray(xi) - center[1], indexing="ij")
    return np.exp(-(X**2 + XI**2) / (2 * a)) / (2 * math.pi * a)


def husimi_from_wigner(W, x, xi, hbar: float) -> np.ndarray:
    """G_{hbar/2} * W on a uniform phase grid (zero outside the grid)."""
    dx, dxi = _check_resolution(x, xi, hbar)
    r = 8 * math.sqrt(hbar / 2)
    kx = np.arange(-math.ceil(r / dx), math.ceil(r / dx) + 1) * dx
    kxi = np.arange(-math.ceil(r / dxi), math.ceil(r / dxi) + 1) * dxi
    g = phase_gaussian(kx, kxi, hbar / 2) * dx * dxi
    return fftconvolve(W, g, mode="same")


def husimi_direct(points, weights, x, xi, hbar: float) -> np.ndarray:
    """<z|A|z>/(2 pi hbar) for A = (2 pi hbar)^{-1} sum_k w_k |z_k><z_k|, via |<z|z_k>|^2."""
    _check_resolution(x, xi, hbar)
    z = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    X, XI = np.meshgrid(x, xi, indexing="ij")
    out = np.zeros_like(X)
    for (q, p), wk in zip(z, w):
        out += wk * np.exp(-((X - q) ** 2 + (XI - p) ** 2) / (2 * hbar))
    return out / (2 * math.pi * hbar) ** 2


def husimi_projector(q: float, p: float, x, xi, hbar: float) -> np.ndarray:
    """Husimi transform of |z0><z0| from the closed-form overlap."""
    _check_resolution(x, xi, hbar)
    X, XI = np.meshgrid(x, xi, indexing="ij")
    ov = np.vectorize(lambda a, b: abs(coherent_overlap([a], [b], [q], [p], hbar)) ** 2)(X, XI)
    return ov / (2 * math.pi * hbar)


def product_transform(T1, T2) -> np.ndarray:
    """Transform of a product operator A1 (x) A2 on the 4D phase space, indexed [x1, xi1, x2, xi2]."""
    return np.einsum("ab,cd->abcd", T1, T2)
