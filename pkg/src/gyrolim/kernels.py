"""2D Coulomb and Biot-Savart kernels, free-space grid convolution, velocity bounds.

Grids are cell-centred on [-L, L]^2 with ``n`` cells per axis. Scalar fields are
``(n, n)`` arrays indexed ``[i, j]`` <-> ``(x_i, y_j)``; vector fields are
``(2, n, n)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from gyrolim import _pairsum

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Kernel evaluated at its singularity."""


class GridError(ValueError):
    """Grid too small, or a point falls outside it."""


def perp(v):
    """v -> v^perp = (-v2, v1), acting on the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred square grid covering [-L, L]^2."""

    L: float = 2.0
    n: int = 256

    def __post_init__(self):
        if self.n < 16:
            raise GridError(f"grid needs n >= 16 cells per axis, got {self.n}")
        if self.n % 2:
            raise GridError(f"cells per axis must be even, got {self.n}")
        if not self.L > 0:
            raise GridError(f"half-width must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def centers(self) -> np.ndarray:
        return -self.L + (np.arange(self.n) + 0.5) * self.h

    def mesh(self):
        c = self.centers
        return np.meshgrid(c, c, indexing="ij")

    def integrate(self, values) -> float:
        return float(self.h**2 * np.sum(values))

    def halved(self) -> "GridSpec":
        """Same domain, half the spacing."""
        return GridSpec(self.L, 2 * self.n)


@dataclass(frozen=True)
class GaussianKernel:
    """Centred Gaussian density on R^d with covariance a*I."""

    a: float
    d: int = 2

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Gaussian covariance must be positive, got {self.a}")
        if self.d not in (2, 4):
            raise ValueError(f"Gaussian dimension must be 2 or 4, got {self.d}")

    def __call__(self, *coords):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        return np.exp(-r2 / (2 * self.a)) / (2 * math.pi * self.a) ** (self.d / 2)


def _norm(r):
    r = np.asarray(r, dtype=float)
    s = np.hypot(r[..., 0], r[..., 1])
    if np.any(s == 0):
        raise DomainError("kernel evaluated at r = 0")
    return r, s


def coulomb_potential(r):
    """V(r) = -(1/2 pi) log|r|."""
    _, s = _norm(r)
    return -np.log(s) / TWO_PI


def coulomb_gradient(r):
    """grad V(r) = -r / (2 pi |r|^2)."""
    r, s = _norm(r)
    return -r / (TWO_PI * s[..., None] ** 2)


def biot_savart_kernel(r):
    """K(r) = r^perp / (2 pi |r|^2), equal to -(grad V)^perp."""
    r, s = _norm(r)
    return perp(r) / (TWO_PI * s[..., None] ** 2)


def mollified_biot_savart(r, delta):
    """K_delta(r) = K(r) (1 - exp(-|r|^2/delta^2)), with K_delta(0) = 0."""
    r = np.asarray(r, dtype=float)
    r2 = np.sum(r**2, axis=-1)
    safe = np.where(r2 > 0, r2, 1.0)
    w = np.where(r2 > 0, -np.expm1(-r2 / delta**2) / safe, 0.0) / TWO_PI
    return perp(r) * w[..., None]


def coulomb_cell_average(h: float) -> float:
    """Mean of V over the square [-h/2, h/2]^2."""
    mean_log = math.log(h) - 0.5 * math.log(2.0) - 1.5 + math.pi / 4
    return -mean_log / TWO_PI


def _kernel_key(kernel):
    if isinstance(kernel, GaussianKernel):
        if kernel.d != 2:
            raise ValueError("grid convolution only supports the planar Gaussian (d = 2)")
        return ("G", kernel.a)
    if kernel in ("V", "grad_V", "K"):
        return (kernel,)
    raise ValueError(f"unknown kernel {kernel!r}; expected 'V', 'grad_V', 'K' or GaussianKernel")


@functools.lru_cache(maxsize=32)
def _kernel_spectrum(L: float, n: int, key: tuple):
    grid = GridSpec(L, n)
    h = grid.h
    off = np.fft.fftfreq(2 * n, d=1.0 / (2 * n)) * h  # offsets 0, h, ..., -h
    ox, oy = np.meshgrid(off, off, indexing="ij")
    r2 = ox**2 + oy**2
    r2[0, 0] = 1.0
    name = key[0]
    if name == "V":
        k = -0.5 * np.log(r2) / TWO_PI
        k[0, 0] = coulomb_cell_average(h)
        comps = [k]
    elif name == "grad_V":
        comps = [-ox / (TWO_PI * r2), -oy / (TWO_PI * r2)]
        for c in comps:
            c[0, 0] = 0.0
    elif name == "K":
        comps = [-oy / (TWO_PI * r2), ox / (TWO_PI * r2)]
        for c in comps:
            c[0, 0] = 0.0
    else:
        r2[0, 0] = 0.0
        g = np.exp(-r2 / (2 * key[1]))
        # unit discrete mass keeps positivity and the integral exact
        comps = [g / (h**2 * g.sum())]
    return tuple(np.fft.rfft2(c) for c in comps)


def free_space_convolve(f, grid: GridSpec, kernel):
    """Non-periodic convolution kernel * f on ``grid`` by zero-padded domain doubling.

    ``kernel`` is one of ``"V"``, ``"grad_V"``, ``"K"`` or a planar
    :class:`GaussianKernel`. Returns an ``(n, n)`` array for scalar kernels and
    ``(2, n, n)`` for the vector ones.
    """
    key = _kernel_key(kernel)
    f = np.asarray(f, dtype=float)
    n = grid.n
    if f.shape != (n, n):
        raise GridError(f"field shape {f.shape} does not match grid ({n}, {n})")
    spectra = _kernel_spectrum(float(grid.L), n, key)
    fhat = np.fft.rfft2(f, s=(2 * n, 2 * n))
    out = [np.fft.irfft2(fhat * s, s=(2 * n, 2 * n))[:n, :n] * grid.h**2 for s in spectra]
    return out[0] if len(out) == 1 else np.stack(out)


def bilinear(field, grid: GridSpec, points):
    """Interpolate a scalar ``(n, n)`` or vector ``(k, n, n)`` field at points of shape (m, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    h = grid.h
    s = (pts + grid.L) / h - 0.5
    lo = np.floor(s).astype(int)
    if np.any(lo < 0) or np.any(lo > grid.n - 2):
        bad = pts[np.any((lo < 0) | (lo > grid.n - 2), axis=1)][0]
        raise GridError(f"point {tuple(bad)} lies outside the interpolation hull of the grid")
    t = s - lo
    i, j = lo[:, 0], lo[:, 1]
    tx, ty = t[:, 0], t[:, 1]
    f = np.asarray(field)
    return (
        f[..., i, j] * (1 - tx) * (1 - ty)
        + f[..., i + 1, j] * tx * (1 - ty)
        + f[..., i, j + 1] * (1 - tx) * ty
        + f[..., i + 1, j + 1] * tx * ty
    )


def velocity_from_vorticity(omega, points, grid: GridSpec | None = None):
    """Biot-Savart velocity u = K * omega evaluated at ``points`` (m, 2).

    ``omega`` may be a grid field (requires ``grid``), an object with
    ``positions``, ``gamma`` and ``delta`` (vortex blobs), or a tuple
    ``(positions, weights)`` of unmollified point vortices.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if hasattr(omega, "positions") and hasattr(omega, "delta"):
        ux, uy = _pairsum.blob_velocity(
            pts[:, 0].copy(), pts[:, 1].copy(),
            omega.positions[:, 0].copy(), omega.positions[:, 1].copy(),
            np.asarray(omega.gamma, dtype=float), float(omega.delta),
        )
        return np.column_stack([ux, uy])
    if isinstance(omega, tuple):
        pos, w = (np.atleast_2d(np.asarray(a, dtype=float)) for a in omega)
        w = w.ravel()
        diff = pts[:, None, :] - pos[None, :, :]
        if np.any(np.all(diff == 0, axis=-1)):
            raise DomainError("evaluation point coincides with a point vortex")
        return np.einsum("j,mjk->mk", w, biot_savart_kernel(diff))
    if grid is None:
        raise TypeError("grid vorticity requires a GridSpec")
    u = free_space_convolve(omega, grid, "K")
    return bilinear(u, grid, pts).T


def velocity_sup_bound(omega, grid: GridSpec) -> float:
    """2 ||omega||_inf + ||omega||_1 / (2 pi).

    Near field: |K(y)| <= 1/(2 pi |y|) integrates to 2 over |y| <= 2.
    Far field: |K(y)| <= 1/(2 pi) on |y| >= 1.
    """
    omega = np.asarray(omega, dtype=float)
    return 2.0 * float(np.max(np.abs(omega))) + grid.integrate(np.abs(omega)) / TWO_PI
