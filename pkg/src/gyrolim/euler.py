"""Lagrangian vortex-blob solver for 2D incompressible Euler on the whole plane.

Blobs carry Gaussian cores, so the induced velocity uses the mollified kernel
K_delta(r) = K(r) (1 - exp(-|r|^2/delta^2)). Grid diagnostics (stream function,
velocity gradient, the divergence of the convective term and the pressure) are
rebuilt from the deposited vorticity with free-space convolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gyrolim import _pairsum
from gyrolim.kernels import GridError, GridSpec, bilinear, free_space_convolve


@dataclass
class VortexBlobs:
    positions: np.ndarray
    gamma: np.ndarray
    delta: float

    def __post_init__(self):
        self.positions = np.ascontiguousarray(np.atleast_2d(np.asarray(self.positions, dtype=float)))
        self.gamma = np.ascontiguousarray(np.asarray(self.gamma, dtype=float).ravel())
        if self.positions.shape != (self.gamma.size, 2):
            raise ValueError("positions must have shape (M, 2) matching the circulations")
        if self.gamma.size == 0:
            raise ValueError("need at least one blob")
        if np.any(self.gamma < 0):
            raise ValueError("circulations must be non-negative")
        if abs(self.gamma.sum() - 1.0) > 1e-12:
            raise ValueError(f"circulations must sum to 1, got {self.gamma.sum()!r}")
        if not self.delta > 0:
            raise ValueError(f"core radius must be positive, got {self.delta}")

    @property
    def M(self) -> int:
        return self.gamma.size

    def replace(self, positions) -> "VortexBlobs":
        return VortexBlobs(positions, self.gamma, self.delta)


@dataclass
class EulerParams:
    dt: float = 0.01
    T: float = 1.0
    grid: GridSpec = field(default_factory=GridSpec)
    M: int = 4096
    core_factor: float = 2.0
    remesh_every: int = 0  # 0 disables remeshing

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.M < 1:
            raise ValueError("M must be at least 1")


@dataclass
class EulerFields:
    grid: GridSpec
    eps: float
    omega: np.ndarray
    psi: np.ndarray
    u: np.ndarray  # (2, n, n)
    grad_u: np.ndarray  # (2, 2, n, n), grad_u[i, j] = d_i u^j
    frakU: np.ndarray
    P: np.ndarray
    mu: np.ndarray

    def velocity_at(self, points):
        return bilinear(self.u, self.grid, points).T


def init_blobs_from_vorticity(omega0, M: int, grid: GridSpec, core_factor: float = 2.0) -> VortexBlobs:
    """Place blobs on a square lattice over the support of ``omega0``.

    ``omega0(x, y)`` is a vectorized non-negative density. The lattice spacing
    h_b is chosen so that roughly ``M`` lattice points fall inside the support;
    the lattice is centred on the centre of mass. Circulations are
    omega0(x_i) h_b^2 renormalized to total 1, and the core is core_factor * h_b.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    X, Y = grid.mesh()
    vals = np.asarray(omega0(X, Y), dtype=float)
    if np.any(vals < 0):
        raise ValueError("initial vorticity must be non-negative")
    mass = vals.sum()
    if not mass > 0:
        raise ValueError("initial vorticity vanishes on the grid")
    support = vals > 0
    area = grid.h**2 * support.sum()
    hb = math.sqrt(area / M)
    cx = float((vals * X).sum() / mass)
    cy = float((vals * Y).sum() / mass)
    xs, ys = X[support], Y[support]
    reach = grid.h
    ilo = math.floor((xs.min() - reach - cx) / hb)
    ihi = math.ceil((xs.max() + reach - cx) / hb)
    jlo = math.floor((ys.min() - reach - cy) / hb)
    jhi = math.ceil((ys.max() + reach - cy) / hb)
    I, J = np.meshgrid(np.arange(ilo, ihi + 1), np.arange(jlo, jhi + 1), indexing="ij")
    px = cx + I.ravel() * hb
    py = cy + J.ravel() * hb
    w = np.asarray(omega0(px, py), dtype=float)
    keep = w > 0
    if not keep.any():
        raise ValueError("no lattice point hits the support; increase M")
    gamma = w[keep] * hb**2
    gamma = gamma / gamma.sum()
    return VortexBlobs(np.column_stack([px[keep], py[keep]]), gamma, core_factor * hb)


def blob_velocity(blobs: VortexBlobs, points) -> np.ndarray:
    """u(x) = sum_i gamma_i K_delta(x - x_i) at points (m, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ux, uy = _pairsum.blob_velocity(
        np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
        np.ascontiguousarray(blobs.positions[:, 0]), np.ascontiguousarray(blobs.positions[:, 1]),
        blobs.gamma, float(blobs.delta),
    )
    return np.column_stack([ux, uy])


def step_euler(blobs: VortexBlobs, dt: float) -> VortexBlobs:
    """One classical RK4 step of dx_i/dt = u(x_i); circulations are untouched."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = blobs.positions
    k1 = blob_velocity(blobs, x)
    k2 = blob_velocity(blobs.replace(x + 0.5 * dt * k1), x + 0.5 * dt * k1)
    k3 = blob_velocity(blobs.replace(x + 0.5 * dt * k2), x + 0.5 * dt * k2)
    k4 = blob_velocity(blobs.replace(x + dt * k3), x + dt * k3)
    return blobs.replace(x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def deposit_vorticity(blobs: VortexBlobs, grid: GridSpec, cutoff: float = 6.0) -> np.ndarray:
    """Grid samples of sum_i gamma_i exp(-|x - x_i|^2/delta^2) / (pi delta^2)."""
    if np.any(np.abs(blobs.positions) > grid.L):
        raise GridError(
            f"blob support escaped the grid: max |coordinate| = {np.abs(blobs.positions).max():.4g} > L = {grid.L}"
        )
    return _pairsum.deposit_gaussian_blobs(
        np.ascontiguousarray(blobs.positions[:, 0]), np.ascontiguousarray(blobs.positions[:, 1]),
        blobs.gamma, float(blobs.delta), -float(grid.L), grid.h, grid.n, cutoff,
    )


def remesh(blobs: VortexBlobs, grid: GridSpec, M: int | None = None) -> VortexBlobs:
    """Redistribute circulation onto a fresh lattice from the deposited vorticity."""
    omega = deposit_vorticity(blobs, grid)
    floor = 1e-12 * omega.max()

    def sampled(x, y):
        v = bilinear(omega, grid, np.column_stack([np.ravel(x), np.ravel(y)]))
        return np.where(v > floor, v, 0.0).reshape(np.shape(x))

    inner = GridSpec(grid.L, grid.n)
    return init_blobs_from_vorticity(_clip_to_hull(sampled, inner), M or blobs.M, grid)


def _clip_to_hull(fn, grid):
    lim = grid.L - grid.h / 2

    def wrapped(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (np.abs(x) < lim) & (np.abs(y) < lim)
        out = np.zeros(np.broadcast(x, y).shape)
        if inside.any():
            out[inside] = fn(x[inside], y[inside])
        return out

    return wrapped


def _grad(f, h):
    gx, gy = np.gradient(f, h, edge_order=2)
    return np.stack([gx, gy])


def fields_from_vorticity(omega, grid: GridSpec, eps: float = 0.0) -> EulerFields:
    """Derived fields for a grid vorticity.

    psi = -V * omega (so Laplacian psi = omega and u^perp = grad(V * omega)),
    u = (grad psi)^perp, grad u by centred differences,
    frakU = sum_ij d_i u^j d_j u^i, -Laplacian P = frakU, mu = omega + eps frakU.
    """
    omega = np.asarray(omega, dtype=float)
    h = grid.h
    psi = -free_space_convolve(omega, grid, "V")
    dpsi = _grad(psi, h)
    u = np.stack([-dpsi[1], dpsi[0]])
    grad_u = np.stack([_grad(u[0], h), _grad(u[1], h)], axis=1)  # [i, j] = d_i u^j
    frakU = np.einsum("ij...,ji...->...", grad_u, grad_u)
    P = free_space_convolve(frakU, grid, "V")
    return EulerFields(grid, eps, omega, psi, u, grad_u, frakU, P, omega + eps * frakU)


def fields_from_blobs(blobs: VortexBlobs, grid: GridSpec, eps: float = 0.0) -> EulerFields:
    return fields_from_vorticity(deposit_vorticity(blobs, grid), grid, eps)


def grad_u_norms(fields: EulerFields, ps=(2, 4, 8, 16)) -> dict:
    """Grid L^p norms of the pointwise Frobenius norm of grad u, and norm/p."""
    g = np.sqrt(np.sum(fields.grad_u**2, axis=(0, 1)))
    out = {}
    for p in ps:
        if p < 1:
            raise ValueError(f"L^p norm needs p >= 1, got {p}")
        if math.isinf(p):
            val = float(g.max())
        else:
            val = fields.grid.integrate(g**p) ** (1.0 / p)
        out[p] = {"norm": val, "ratio": val / p if not math.isinf(p) else 0.0}
    return out


def holder_seminorm(f, grid: GridSpec, alpha: float, max_shift: int = 8) -> float:
    """sup |f(x) - f(y)| / |x - y|^alpha over axis and diagonal grid shifts up to ``max_shift`` cells."""
    best = 0.0
    for s in range(1, max_shift + 1):
        for di, dj in ((s, 0), (0, s), (s, s), (s, -s)):
            a = f[max(di, 0): f.shape[0] + min(di, 0) or None, max(dj, 0): f.shape[1] + min(dj, 0) or None]
            b = f[max(-di, 0): f.shape[0] + min(-di, 0) or None, max(-dj, 0): f.shape[1] + min(-dj, 0) or None]
            dist = grid.h * math.hypot(di, dj)
            best = max(best, float(np.max(np.abs(a - b))) / dist**alpha)
    return best


def log_regularity_bound(fields: EulerFields, alpha: float = 0.5, a: float = 1.0) -> dict:
    """Structure ||omega||_a + ||omega||_inf log(e + ||omega||_{C^alpha}/||omega||_inf) next to ||grad u||_inf."""
    om = fields.omega
    sup = float(np.max(np.abs(om)))
    la = fields.grid.integrate(np.abs(om) ** a) ** (1.0 / a)
    if sup == 0:
        return {"grad_u_inf": 0.0, "bound_structure": la, "ratio": 0.0}
    c_alpha = sup + holder_seminorm(om, fields.grid, alpha)
    structure = la + sup * math.log(math.e + c_alpha / sup)
    g = float(np.sqrt(np.sum(fields.grad_u**2, axis=(0, 1))).max())
    return {"grad_u_inf": g, "bound_structure": structure, "ratio": g / structure}


@dataclass
class EulerTrajectory:
    """Blob positions and velocities at the solver's own time levels."""

    times: np.ndarray
    positions: np.ndarray  # (steps + 1, M, 2)
    velocities: np.ndarray
    gamma: np.ndarray
    delta: float

    def blobs_at(self, t: float) -> VortexBlobs:
        """Cubic Hermite interpolation between stored levels."""
        times = self.times
        if t <= times[0]:
            return VortexBlobs(self.positions[0], self.gamma, self.delta)
        if t >= times[-1]:
            if t - times[-1] > 1e-12 * max(1.0, abs(t)):
                raise ValueError(f"t = {t} beyond the computed horizon {times[-1]}")
            return VortexBlobs(self.positions[-1], self.gamma, self.delta)
        k = int(np.searchsorted(times, t, side="right") - 1)
        t0, t1 = times[k], times[k + 1]
        dt = t1 - t0
        s = (t - t0) / dt
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        x = (h00 * self.positions[k] + h10 * dt * self.velocities[k]
             + h01 * self.positions[k + 1] + h11 * dt * self.velocities[k + 1])
        return VortexBlobs(x, self.gamma, self.delta)


def run_euler(blobs: VortexBlobs, params: EulerParams) -> EulerTrajectory:
    """Advance to params.T, storing every level; the last step is shortened to land on T."""
    times = [0.0]
    pos = [blobs.positions.copy()]
    vel = [blob_velocity(blobs, blobs.positions)]
    t = 0.0
    step = 0
    while t < params.T - 1e-14:
        dt = min(params.dt, params.T - t)
        blobs = step_euler(blobs, dt)
        step += 1
        if params.remesh_every and step % params.remesh_every == 0:
            blobs = remesh(blobs, params.grid)
            # remeshing changes M; restart the stored history at this level
            times, pos, vel = [], [], []
        t += dt
        times.append(t)
        pos.append(blobs.positions.copy())
        vel.append(blob_velocity(blobs, blobs.positions))
    return EulerTrajectory(np.array(times), np.array(pos), np.array(vel), blobs.gamma, blobs.delta)
