"""Magnetized and non-magnetic Newton systems with 2D Coulomb interaction.

Magnetic mode integrates

    x' = xi,    xi' = -(1/eps) (s xi^perp + F),    F_i = (1/N) sum_{j != i} grad V(x_i - x_j)

where ``s = gyro_sign``. ``s = +1`` is the system exactly as usually written;
``s = -1`` flips the gyration so that the guiding-centre drift xi* = s F^perp
coincides with the Biot-Savart velocity K * rho instead of its negative.
Non-magnetic mode integrates x' = xi, xi' = -F.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from gyrolim import _pairsum

TWO_PI = 2.0 * math.pi


class CollisionError(RuntimeError):
    """Two particles came closer than the separation guard."""

    def __init__(self, message, pair=None, distance=None):
        super().__init__(message)
        self.pair = pair
        self.distance = distance


class NonFiniteStateError(RuntimeError):
    pass


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    velocities: np.ndarray
    eps: float = 1.0

    def __post_init__(self):
        self.positions = np.ascontiguousarray(np.atleast_2d(np.asarray(self.positions, dtype=float)))
        self.velocities = np.ascontiguousarray(np.atleast_2d(np.asarray(self.velocities, dtype=float)))
        if self.positions.ndim != 2 or self.positions.shape[1] != 2 or self.positions.shape[0] < 1:
            raise ValueError("positions must have shape (N, 2) with N >= 1")
        if self.velocities.shape != self.positions.shape:
            raise ValueError("velocities must match positions in shape")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.positions.copy(), self.velocities.copy(), self.eps)

    def min_separation(self) -> float:
        if self.N < 2:
            return math.inf
        return math.sqrt(_pairsum.min_pair_distance2(*_xy(self.positions)))

    def empirical_integral(self, phi) -> float:
        """Integral of ``phi(x, y)`` against the empirical measure (1/N) sum delta_{x_i}."""
        return float(np.mean(phi(self.positions[:, 0], self.positions[:, 1])))


@dataclass(frozen=True)
class MagneticParams:
    eps: float = 0.1
    magnetic: bool = True
    gyro_sign: int = 1

    def __post_init__(self):
        if self.magnetic and not self.eps > 0:
            raise ValueError("eps must be positive when the magnetic field is on")
        if self.gyro_sign not in (1, -1):
            raise ValueError("gyro_sign must be +1 or -1")

    @property
    def J(self) -> np.ndarray:
        return np.array([[0.0, 2.0], [-2.0, 0.0]])


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    T: float = 1.0
    delta_min: float = 1e-9
    scheme: str = "strang-exact-rotation"
    force: str = "direct"  # or "barnes-hut"
    theta: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if not self.delta_min > 0:
            raise ValueError("delta_min must be positive")
        if self.scheme not in ("strang-exact-rotation", "rk4-reference"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.force not in ("direct", "barnes-hut"):
            raise ValueError(f"unknown force summation {self.force!r}")
        if not 0 < self.theta < 1.5:
            raise ValueError("Barnes-Hut opening angle must lie in (0, 1.5)")


def _xy(a):
    return np.ascontiguousarray(a[:, 0]), np.ascontiguousarray(a[:, 1])


def _closest_pair(x):
    d = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return (int(min(i, j)), int(max(i, j))), float(d[i, j])


def mean_field_force(positions, delta_min: float = 1e-9, method: str = "direct", theta: float = 0.5):
    """F_i = (1/N) sum_{j != i} grad V(x_i - x_j) as an (N, 2) array.

    Raises :class:`CollisionError` naming the closest pair when two particles
    are within ``delta_min``.
    """
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    if x.shape[0] == 1:
        return np.zeros((1, 2))
    F, d2 = _forces_and_min_d2(x, method, theta)
    if d2 < delta_min**2:
        pair, dist = _closest_pair(x)
        raise CollisionError(f"particles {pair} at distance {dist:.3e} < delta_min = {delta_min:.3e}", pair, dist)
    return F


def _forces_and_min_d2(x, method="direct", theta=0.5):
    if method == "barnes-hut":
        from gyrolim import treecode

        return treecode.coulomb_forces_bh(x, theta)
    fx, fy, d2 = _pairsum.coulomb_forces(*_xy(x))
    return np.column_stack([fx, fy]), d2


def _rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], axis=-1)


def rotation_update(xi, F, dt: float, eps: float, gyro_sign: int = 1):
    """Exact solution after ``dt`` of xi' = -(1/eps)(s xi^perp + F) with F frozen.

    The fixed point is xi* = s F^perp; the deviation rotates by angle -s dt/eps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    xi = np.asarray(xi, dtype=float)
    F = np.asarray(F, dtype=float)
    star = gyro_sign * np.stack([-F[..., 1], F[..., 0]], axis=-1)
    return star + _rotate(xi - star, -gyro_sign * dt / eps)


def _rhs(x, xi, params: MagneticParams, cfg: IntegratorConfig):
    F = mean_field_force(x, cfg.delta_min, cfg.force, cfg.theta)
    if params.magnetic:
        s = params.gyro_sign
        dxi = -(s * np.column_stack([-xi[:, 1], xi[:, 0]]) + F) / params.eps
    else:
        dxi = -F
    return xi, dxi


def step_strang(ens: ParticleEnsemble, dt: float, params: MagneticParams | None = None,
                cfg: IntegratorConfig | None = None) -> ParticleEnsemble:
    """Half drift, exact velocity update with the force at the midpoint positions, half drift."""
    params = params or MagneticParams(ens.eps)
    cfg = cfg or IntegratorConfig(dt=dt)
    x = ens.positions + 0.5 * dt * ens.velocities
    F = mean_field_force(x, cfg.delta_min, cfg.force, cfg.theta)
    if params.magnetic:
        xi = rotation_update(ens.velocities, F, dt, params.eps, params.gyro_sign)
    else:
        xi = ens.velocities - dt * F
    x = x + 0.5 * dt * xi
    return ParticleEnsemble(x, xi, ens.eps)


def step_rk4(ens: ParticleEnsemble, dt: float, params: MagneticParams | None = None,
             cfg: IntegratorConfig | None = None) -> ParticleEnsemble:
    """Classical RK4 on the full system; the reference scheme (needs dt << eps)."""
    params = params or MagneticParams(ens.eps)
    cfg = cfg or IntegratorConfig(dt=dt)
    x0, v0 = ens.positions, ens.velocities
    k1x, k1v = _rhs(x0, v0, params, cfg)
    k2x, k2v = _rhs(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v, params, cfg)
    k3x, k3v = _rhs(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v, params, cfg)
    k4x, k4v = _rhs(x0 + dt * k3x, v0 + dt * k3v, params, cfg)
    x = x0 + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = v0 + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return ParticleEnsemble(x, v, ens.eps)


def interaction_energy(positions) -> float:
    """(1/2N^2) sum_{i != j} V(x_i - x_j)."""
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    N = x.shape[0]
    if N < 2:
        return 0.0
    return float(-np.sum(_pairsum.log_pair_sums(*_xy(x))) / (TWO_PI * 2 * N**2))


def hamiltonian(ens: ParticleEnsemble, params: MagneticParams | None = None, delta_min: float = 1e-9,
                pair: float | None = None) -> float:
    """(eps/2N) sum |xi|^2 + (1/2N^2) sum_{i != j} V; kinetic prefactor 1/2N without the field.

    ``pair`` may pass a precomputed (1/N^2) sum_{i != j} V.
    """
    params = params or MagneticParams(ens.eps)
    if ens.N > 1 and ens.min_separation() < delta_min:
        pair, dist = _closest_pair(ens.positions)
        raise CollisionError(f"particles {pair} at distance {dist:.3e}", pair, dist)
    scale = params.eps if params.magnetic else 1.0
    kin = scale * float(np.sum(ens.velocities**2)) / (2 * ens.N)
    return kin + (interaction_energy(ens.positions) if pair is None else 0.5 * pair)


def sample_positions(density, N: int, seed, max_rounds: int = 200) -> np.ndarray:
    """Rejection sampling from ``density(x, y)`` over its bounding box against its sup."""
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = density.bounding_box()
    sup = float(density.sup)
    out = np.empty((0, 2))
    for _ in range(max_rounds):
        need = N - out.shape[0]
        if need <= 0:
            break
        batch = max(64, 4 * need)
        px = rng.uniform(x0, x1, batch)
        py = rng.uniform(y0, y1, batch)
        accept = rng.uniform(0.0, sup, batch) < density(px, py)
        out = np.vstack([out, np.column_stack([px[accept], py[accept]])])
    if out.shape[0] < N:
        raise RuntimeError(f"rejection sampling accepted {out.shape[0]} of {N} points after {max_rounds} rounds")
    return out[:N]


def sample_positions_sobol(density, N: int, seed, table: int = 20001) -> np.ndarray:
    """Low-discrepancy points for a radial density: scrambled Sobol pairs through the radial inverse CDF.

    ``density`` needs ``radius``, ``center`` and ``radial(r)``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    rr = np.linspace(0.0, density.radius, table)
    dm = 2 * np.pi * rr * density.radial(rr)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dm[1:] + dm[:-1]) * np.diff(rr))])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 0])  # inverse needs a strictly increasing table
    sob = qmc.Sobol(2, scramble=True, seed=np.random.default_rng(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for N not a power of two
        u = sob.random(N)
    r = np.interp(u[:, 0], cdf[keep], rr[keep])
    a = 2 * np.pi * u[:, 1]
    cx, cy = density.center
    return np.column_stack([cx + r * np.cos(a), cy + r * np.sin(a)])


SAMPLERS = {"iid": sample_positions, "sobol": sample_positions_sobol}


def sample_monokinetic(density, velocity: Callable, N: int, seed, eps: float = 1.0,
                       frame: str = "monokinetic", theta: Callable | None = None,
                       sampling: str = "iid") -> ParticleEnsemble:
    """Positions from ``density`` (i.i.d., or ``sampling="sobol"``); velocities xi_i = u0(x_i).

    ``frame="rotating"`` instead sets xi_i = -x_i^perp/(2 eps) + theta(x_i).
    """
    if sampling not in SAMPLERS:
        raise ValueError(f"unknown sampling {sampling!r}; expected one of {sorted(SAMPLERS)}")
    x = SAMPLERS[sampling](density, N, seed)
    if frame == "monokinetic":
        xi = np.asarray(velocity(x), dtype=float)
    elif frame == "rotating":
        th = np.zeros_like(x) if theta is None else np.asarray(theta(x), dtype=float)
        xi = np.column_stack([x[:, 1], -x[:, 0]]) / (2 * eps) + th
    else:
        raise ValueError(f"unknown velocity frame {frame!r}")
    return ParticleEnsemble(x, xi, eps)


Observer = Callable[[float, ParticleEnsemble], dict]


@dataclass
class SimulationResult:
    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    status: str = "ok"
    message: str = ""
    final: ParticleEnsemble | None = None


def run_simulation(ens: ParticleEnsemble, cfg: IntegratorConfig, observers: Sequence[Observer] = (),
                   stride: int = 1, params: MagneticParams | None = None,
                   on_record: Callable[[float, dict], None] | None = None,
                   should_stop: Callable[[], str | None] | None = None) -> SimulationResult:
    """Step to ``cfg.T`` and call every observer every ``stride`` steps (and at t = 0, T).

    Collisions and non-finite states stop the run; records gathered so far are
    kept in the result (and were already pushed through ``on_record``).
    ``should_stop`` is polled after each record; a non-empty message ends the
    run with status ``"stopped"``.
    """
    if stride < 1:
        raise ValueError("observer stride must be at least 1")
    params = params or MagneticParams(ens.eps)
    step = step_strang if cfg.scheme == "strang-exact-rotation" else step_rk4
    res = SimulationResult()
    nsteps = int(round(cfg.T / cfg.dt))
    if abs(nsteps * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        nsteps = int(math.ceil(cfg.T / cfg.dt))

    def record(t, e):
        rec = {}
        for obs in observers:
            rec.update(obs(t, e))
        res.times.append(t)
        res.records.append(rec)
        if on_record is not None:
            on_record(t, rec)

    t = 0.0
    try:
        record(t, ens)
        for k in range(1, nsteps + 1):
            dt = min(cfg.dt, cfg.T - t) if k == nsteps else cfg.dt
            ens = step(ens, dt, params, cfg)
            t = cfg.T if k == nsteps else k * cfg.dt
            if not (np.all(np.isfinite(ens.positions)) and np.all(np.isfinite(ens.velocities))):
                raise NonFiniteStateError(f"non-finite state at t = {t:.6g}")
            if k % stride == 0 or k == nsteps:
                record(t, ens)
                reason = should_stop() if should_stop is not None else None
                if reason:
                    res.status, res.message = "stopped", reason
                    break
    except CollisionError as exc:
        res.status, res.message = "collision", str(exc)
    except NonFiniteStateError as exc:
        res.status, res.message = "nonfinite", str(exc)
    res.final = ens
    return res
