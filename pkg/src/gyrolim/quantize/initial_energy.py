"""Initial modulated energy of the rotating-frame Toeplitz data.

The symbol is nu_eps(dq dp) = omega(q) delta(p + q^perp/2eps - theta(q)) dq and
the position density of its quantization is rho = G_{hbar/2} * omega.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from gyrolim.densities import ChiGaussian
from gyrolim.euler import fields_from_vorticity
from gyrolim.kernels import GaussianKernel, GridError, GridSpec, free_space_convolve


class RegimeWarning(UserWarning):
    """hbar/eps is not small."""


def _zero_theta(q):
    return np.zeros_like(np.asarray(q, dtype=float))


@dataclass
class GyroSymbol:
    eps: float
    hbar: float
    omega: Callable = field(default_factory=ChiGaussian)
    theta: Callable = _zero_theta
    grid: GridSpec = field(default_factory=lambda: GridSpec(4.0, 512))
    N: int | None = None

    def __post_init__(self):
        if not self.eps > 0 or not self.hbar > 0:
            raise ValueError("eps and hbar must be positive")
        radius = getattr(self.omega, "radius", None)
        if radius is not None and radius + 5 * math.sqrt(self.hbar / 2) >= self.grid.L:
            raise GridError(
                f"support radius {radius} plus smoothing width does not fit in [-{self.grid.L}, {self.grid.L}]^2"
            )
        if self.N is None:
            self.N = int(math.ceil(self.eps ** -3 - 1e-9))
        if self.N < 1:
            raise ValueError("N must be at least 1")

    @property
    def ratio(self) -> float:
        return self.hbar / self.eps

    def omega_grid(self) -> np.ndarray:
        X, Y = self.grid.mesh()
        om = np.asarray(self.omega(X, Y), dtype=float)
        edge = np.concatenate([om[0], om[-1], om[:, 0], om[:, -1]])
        if np.any(edge > 0):
            raise GridError("support of omega reaches the grid boundary")
        return om

    def theta_grid(self) -> np.ndarray:
        X, Y = self.grid.mesh()
        pts = np.column_stack([X.ravel(), Y.ravel()])
        th = np.asarray(self.theta(pts), dtype=float)
        return th.T.reshape(2, *X.shape)

    def phase_points(self, stride: int = 1):
        """Weighted points (q, theta(q) - q^perp/2eps) with weights omega(q) h^2 on the support."""
        X, Y = self.grid.mesh()
        om = self.omega_grid()
        sl = (slice(None, None, stride),) * 2
        q = np.column_stack([X[sl].ravel(), Y[sl].ravel()])
        w = om[sl].ravel() * (self.grid.h * stride) ** 2
        keep = w > 0
        q, w = q[keep], w[keep]
        th = np.asarray(self.theta(q), dtype=float)
        p = th - np.column_stack([-q[:, 1], q[:, 0]]) / (2 * self.eps)
        return np.column_stack([q, p]), w / w.sum()


def smoothed_density(omega_grid, grid: GridSpec, hbar: float) -> np.ndarray:
    """rho = G_{hbar/2} * omega on the grid."""
    return free_space_convolve(omega_grid, grid, GaussianKernel(hbar / 2))


@dataclass
class InitialEnergyReport:
    eps: float
    hbar: float
    ratio: float
    N: int
    kinetic: float
    kinetic_correction: float
    kinetic_correction_closed: float
    confinement: float
    confinement_via_rho: float
    I: float
    J: float
    in_regime: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def initial_energy_terms(sym: GyroSymbol) -> InitialEnergyReport:
    """Kinetic, confinement and interaction terms of the initial modulated energy.

    kinetic     = eps int omega |theta|^2 + hbar/(4 eps) + eps hbar
    confinement = eps (int |q|^2 omega + hbar)        (trace of eps |x|^2 against the state)
    J           = int (V * mu)(mu - rho)
    I           = int ((N-1)/N V * rho - V * mu) rho
    with mu = omega + eps frakU built from the Euler fields of omega.
    """
    eps, hbar, grid = sym.eps, sym.hbar, sym.grid
    in_regime = sym.ratio < 1.0
    if not in_regime:
        warnings.warn(f"hbar/eps = {sym.ratio:.3g} >= 1: outside the semiclassical regime", RegimeWarning, stacklevel=2)
    om = sym.omega_grid()
    X, Y = grid.mesh()
    th = sym.theta_grid()
    drift = grid.integrate(om * (th[0] ** 2 + th[1] ** 2))
    correction_closed = hbar / (4 * eps) + eps * hbar
    kinetic = eps * drift + correction_closed
    second = grid.integrate(om * (X**2 + Y**2))
    confinement = eps * (second + hbar)
    rho = smoothed_density(om, grid, hbar)
    confinement_rho = eps * grid.integrate(rho * (X**2 + Y**2))
    fields = fields_from_vorticity(om, grid, eps)
    mu = fields.mu
    V_mu = free_space_convolve(mu, grid, "V")
    V_rho = free_space_convolve(rho, grid, "V")
    N = sym.N
    J = grid.integrate(V_mu * (mu - rho))
    I = grid.integrate(((N - 1) / N * V_rho - V_mu) * rho)
    return InitialEnergyReport(eps, hbar, sym.ratio, N, kinetic, kinetic - eps * drift, correction_closed,
                               confinement, confinement_rho, I, J, in_regime)


def sine_drift(amp: float):
    """theta(q) = amp * (q1, sin q2)."""

    def theta(q):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        return amp * np.column_stack([q[:, 0], np.sin(q[:, 1])])

    return theta


def lattice_phase_points(omega, eps: float, theta: Callable = _zero_theta, n: int = 40):
    """Points (q, theta(q) - q^perp/2eps) on an n x n cell-centred lattice over the support box of ``omega``.

    Weights are omega(q) normalized to total 1; cells where omega vanishes are dropped.
    """
    x0, x1, y0, y1 = omega.bounding_box()
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    w = np.asarray(omega(X, Y), dtype=float).ravel()
    q = np.column_stack([X.ravel(), Y.ravel()])
    keep = w > 0
    q, w = q[keep], w[keep]
    p = np.asarray(theta(q), dtype=float) + np.column_stack([q[:, 1], -q[:, 0]]) / (2 * eps)
    return np.column_stack([q, p]), w / w.sum()
