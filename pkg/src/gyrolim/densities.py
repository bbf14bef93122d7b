"""Radially symmetric, compactly supported probability densities on the plane.

Each density is normalized analytically (radial quadrature), knows its support
radius and its maximum, and gives the closed-form azimuthal Biot-Savart velocity
u_theta(r) = m(r) / (2 pi r) with m(r) the mass inside radius r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def chi_cutoff(r):
    """Smooth cutoff: 1 on the unit disk, 0 outside radius 2."""
    return 1.0 - smooth_step(np.asarray(r, dtype=float) - 1.0)


@dataclass
class RadialDensity:
    """Base class: subclasses implement ``profile(r)`` (unnormalized) and set ``radius``."""

    center: tuple = (0.0, 0.0)
    _norm: float = field(init=False, repr=False, default=1.0)
    _sup: float = field(init=False, repr=False, default=1.0)

    radius = 1.0

    def __post_init__(self):
        mass, _ = integrate.quad(lambda r: 2 * math.pi * r * float(self.profile(r)), 0, self.radius, limit=200)
        self._norm = 1.0 / mass
        rr = np.linspace(0, self.radius, 4001)
        self._sup = float(np.max(self.profile(rr))) * self._norm

    def profile(self, r):
        raise NotImplementedError

    @property
    def sup(self) -> float:
        return self._sup

    def radial(self, r):
        return self._norm * self.profile(np.asarray(r, dtype=float))

    def __call__(self, x, y):
        r = np.hypot(np.asarray(x, dtype=float) - self.center[0], np.asarray(y, dtype=float) - self.center[1])
        return self.radial(r)

    def bounding_box(self):
        cx, cy = self.center
        R = self.radius
        return (cx - R, cx + R, cy - R, cy + R)

    def mass_within(self, r: float) -> float:
        r = min(float(r), self.radius)
        if r <= 0:
            return 0.0
        m, _ = integrate.quad(lambda s: 2 * math.pi * s * float(self.radial(s)), 0, r, limit=200)
        return m

    def azimuthal_velocity(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return np.array([self.mass_within(s) / (2 * math.pi * s) if s > 0 else 0.0 for s in r])

    def velocity(self, points):
        """Closed-form Biot-Savart velocity at points (m, 2)."""
        p = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(self.center)
        r = np.hypot(p[:, 0], p[:, 1])
        ut = self.azimuthal_velocity(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(r > 0, ut / np.where(r > 0, r, 1.0), 0.0)
        return np.column_stack([-p[:, 1] * scale, p[:, 0] * scale])

    def second_moment(self) -> float:
        """Integral of |q - center|^2 times the density."""
        m, _ = integrate.quad(lambda s: 2 * math.pi * s**3 * float(self.radial(s)), 0, self.radius, limit=200)
        return m


@dataclass
class SmoothBump(RadialDensity):
    """c exp(-1 / (1 - r^2/R^2)) on the disk of radius R."""

    R: float = 1.0

    @property
    def radius(self):
        return self.R

    def profile(self, r):
        s = np.asarray(r, dtype=float) / self.R
        inside = s < 1
        safe = np.where(inside, 1.0 - s**2, 1.0)
        return np.where(inside, np.exp(-1.0 / safe), 0.0)


@dataclass
class ChiGaussian(RadialDensity):
    """chi(q) G_{1/2}(q) / Lambda with chi = 1 on B_1 and 0 outside B_2."""

    @property
    def radius(self):
        return 2.0

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return chi_cutoff(r) * np.exp(-(r**2)) / math.pi

    @property
    def Lambda(self) -> float:
        """||chi G_{1/2}||_1."""
        return 1.0 / self._norm


@dataclass
class TruncatedGaussian(RadialDensity):
    """Isotropic Gaussian of variance sigma^2 per axis, cut at ``cutoff`` sigmas."""

    sigma: float = 0.3
    cutoff: float = 4.0

    @property
    def radius(self):
        return self.sigma * self.cutoff

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, np.exp(-(r**2) / (2 * self.sigma**2)), 0.0)


@dataclass
class UniformDisk(RadialDensity):
    R: float = 1.0

    @property
    def radius(self):
        return self.R

    def profile(self, r):
        return np.where(np.asarray(r, dtype=float) <= self.R, 1.0, 0.0)


def make_density(name: str, **kw) -> RadialDensity:
    table = {
        "bump": SmoothBump,
        "chi-gaussian": ChiGaussian,
        "gaussian": TruncatedGaussian,
        "disk": UniformDisk,
    }
    try:
        return table[name](**kw)
    except KeyError:
        raise ValueError(f"unknown density {name!r}; choose from {sorted(table)}") from None
