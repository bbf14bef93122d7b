"""Modulated energy of empirical particle data against a grid density.

With nu = mu_{X_N} - mu and the diagonal removed,

    f_N(X_N, mu) = iint V(x - y) dnu(x) dnu(y)
                 = (1/N^2) sum_{i != j} V(x_i - x_j) - (2/N) sum_i (V * mu)(x_i) + iint V mu mu.

Grid potentials come from :func:`gyrolim.kernels.free_space_convolve` and are
bilinearly interpolated at particles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from gyrolim import _pairsum
from gyrolim.kernels import GridError, GridSpec, bilinear, free_space_convolve

TWO_PI = 2.0 * math.pi


def _positions(X):
    x = np.atleast_2d(np.asarray(getattr(X, "positions", X), dtype=float))
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("positions must have shape (N, 2)")
    return x


def _xy(x):
    return np.ascontiguousarray(x[:, 0]), np.ascontiguousarray(x[:, 1])


def _check_distinct(x):
    if x.shape[0] > 1 and _pairsum.min_pair_distance2(*_xy(x)) == 0.0:
        raise ValueError("coincident particles: the off-diagonal Coulomb energy is infinite")


def pair_energy(X) -> float:
    """(1/N^2) sum_{i != j} V(x_i - x_j)."""
    x = _positions(X)
    N = x.shape[0]
    if N < 2:
        return 0.0
    _check_distinct(x)
    return float(-np.sum(_pairsum.log_pair_sums(*_xy(x))) / (TWO_PI * N**2))


def f_N(X, mu, grid: GridSpec, potential=None, pair=None) -> float:
    """Off-diagonal Coulomb energy of mu_{X_N} - mu.

    ``mu`` is an (n, n) grid density, or ``None`` for the purely empirical term.
    ``potential`` may pass a precomputed V * mu and ``pair`` a precomputed
    :func:`pair_energy`.
    """
    x = _positions(X)
    val = pair_energy(x) if pair is None else pair
    if mu is None:
        return val
    mu = np.asarray(mu, dtype=float)
    phi = free_space_convolve(mu, grid, "V") if potential is None else potential
    cross = float(np.mean(bilinear(phi, grid, x)))
    self_term = grid.integrate(phi * mu)
    return val - 2.0 * cross + self_term


def _pair_energy_blocked(x, block=256) -> float:
    """Same pair sum as :func:`pair_energy`, by blocked numpy distance matrices."""
    N = x.shape[0]
    total = 0.0
    for a in range(0, N, block):
        d = x[a:a + block, None, :] - x[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        idx = np.arange(a, min(a + block, N))
        r2[idx - a, idx] = 1.0
        total += float(np.sum(np.log(r2)))
    return -0.5 * total / (TWO_PI * N**2)


def interaction_modulated_energy(X, mu, grid: GridSpec) -> float:
    """E_2 computed without the f_N helpers: blocked pair sum, scipy interpolation, vdot quadrature."""
    x = _positions(X)
    _check_distinct(x)
    phi = free_space_convolve(mu, grid, "V")
    c = grid.centers
    interp = RegularGridInterpolator((c, c), phi, method="linear", bounds_error=False, fill_value=None)
    lim = grid.L - grid.h / 2
    if np.any(np.abs(x) > lim):
        raise GridError("particle outside the interpolation hull of the grid")
    cross = float(np.sum(interp(x))) / x.shape[0]
    self_term = grid.h**2 * float(np.vdot(phi.ravel(), np.asarray(mu, dtype=float).ravel()))
    return 0.5 * (_pair_energy_blocked(x) if x.shape[0] > 1 else 0.0) - cross + 0.5 * self_term


def slack_from_f(fN: float, mu, N: int) -> float:
    sup = float(np.max(np.abs(mu))) if mu is not None else 0.0
    return fN + (1.0 + sup) / N + math.log(N) / N


def lower_bound_slack(X, mu, grid: GridSpec, potential=None) -> float:
    """f_N + (1 + ||mu||_inf)/N + log(N)/N, which is non-negative up to quadrature error."""
    x = _positions(X)
    return slack_from_f(f_N(x, mu, grid, potential), mu, x.shape[0])


def slack_tolerance(mu) -> float:
    return 1e-4 * (1.0 + float(np.max(np.abs(mu))))


def f_prime_N(X, mu, u_grid, grid: GridSpec, u_particles=None) -> float:
    """iint_{x != y} (u(x) - u(y)) . grad V(x - y) dnu(x) dnu(y) with nu = mu_{X_N} - mu.

    ``u_grid`` is a (2, n, n) field (ignored when ``mu`` is None and
    ``u_particles`` is given); ``u_particles`` overrides interpolation at particles.
    Both mixed terms coincide by the x <-> y symmetry of the integrand, giving

        -(2/N) sum_i [u(x_i) . (grad V * mu)(x_i) - (grad V * . (u mu))(x_i)].
    """
    x = _positions(X)
    N = x.shape[0]
    _check_distinct(x)
    up = bilinear(u_grid, grid, x).T if u_particles is None else np.asarray(u_particles, dtype=float)
    pair = 0.0
    if N > 1:
        ux, uy = _xy(up)
        pair = float(np.sum(_pairsum.commutator_pair_sums(*_xy(x), ux, uy))) / N**2
    if mu is None:
        return pair
    mu = np.asarray(mu, dtype=float)
    u_grid = np.asarray(u_grid, dtype=float)
    gV_mu = free_space_convolve(mu, grid, "grad_V")
    div_term = free_space_convolve(u_grid[0] * mu, grid, "grad_V")[0] + free_space_convolve(u_grid[1] * mu, grid, "grad_V")[1]
    grid_comm = np.sum(u_grid * gV_mu, axis=0) - div_term
    gv_p = bilinear(gV_mu, grid, x).T
    div_p = bilinear(div_term, grid, x)
    cross = -2.0 * float(np.mean(np.sum(up * gv_p, axis=1) - div_p))
    return pair + cross + grid.integrate(grid_comm * mu)


@dataclass
class EnergyBreakdown:
    E: float
    E1: float
    E2: float
    E_star: float  # interaction part with mu replaced by omega
    fN: float
    fN_prime: float
    slack: float
    confinement: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classical_modulated_energy(ensemble, fields, include_confinement: bool = False,
                               u_particles=None, with_f_prime: bool = False, pair=None,
                               independent_e2: bool = True) -> EnergyBreakdown:
    """Modulated energy of an ensemble against Euler fields.

    E1 = (eps/2N) sum |xi_i - u(x_i)|^2 [+ (eps/2N) sum |x_i|^2],
    E2 = f_N(X_N, mu)/2 with mu = omega + eps frakU, E_star = f_N(X_N, omega)/2.
    With ``independent_e2`` E2 comes from the second code path instead of f_N/2.
    """
    grid = fields.grid
    x = ensemble.positions
    N = ensemble.N
    if abs(ensemble.eps - fields.eps) > 1e-15 * max(1.0, ensemble.eps):
        raise ValueError(f"ensemble eps {ensemble.eps} differs from field eps {fields.eps}")
    up = fields.velocity_at(x) if u_particles is None else np.asarray(u_particles, dtype=float)
    eps = ensemble.eps
    E1 = eps / (2 * N) * float(np.sum((ensemble.velocities - up) ** 2))
    if include_confinement:
        E1 += eps / (2 * N) * float(np.sum(x**2))
    pair = pair_energy(x) if pair is None else pair
    fN = f_N(x, fields.mu, grid, pair=pair)
    E2 = interaction_modulated_energy(x, fields.mu, grid) if independent_e2 else 0.5 * fN
    slack = slack_from_f(fN, fields.mu, N)
    E_star = 0.5 * f_N(x, fields.omega, grid, pair=pair)
    fp = f_prime_N(x, fields.mu, fields.u, grid, up) if with_f_prime else math.nan
    return EnergyBreakdown(E1 + E2, E1, E2, E_star, fN, fp, slack, include_confinement)


def lipschitz_norm(phi_grid, grid: GridSpec) -> float:
    """Discrete C^{0,1} norm: max |phi| + max |grad phi|."""
    g = np.gradient(phi_grid, grid.h, edge_order=2)
    return float(np.max(np.abs(phi_grid)) + np.max(np.hypot(g[0], g[1])))


def h1_seminorm(phi_grid, grid: GridSpec) -> float:
    g = np.gradient(phi_grid, grid.h, edge_order=2)
    return math.sqrt(grid.integrate(g[0] ** 2 + g[1] ** 2))


@dataclass
class CoercivityReport:
    phi_id: str
    N: int
    lhs: float
    A: float
    B: float
    slack: float
    lambda_hat: float = math.nan


def coercivity_check(phi, X, mu, grid: GridSpec, phi_id: str = "phi") -> CoercivityReport:
    """LHS = |int phi d(mu_{X_N} - mu)| with the two structural components of the bound."""
    x = _positions(X)
    Xg, Yg = grid.mesh()
    pg = np.asarray(phi(Xg, Yg), dtype=float) * np.ones_like(Xg)
    if not np.all(np.isfinite(pg)):
        raise ValueError(f"test function {phi_id!r} is not finite on the grid")
    px = np.asarray(phi(x[:, 0], x[:, 1]), dtype=float) * np.ones(x.shape[0])
    lhs = abs(float(np.mean(px)) - grid.integrate(pg * mu))
    slack = lower_bound_slack(x, mu, grid)
    return CoercivityReport(phi_id, x.shape[0], lhs, lipschitz_norm(pg, grid),
                            h1_seminorm(pg, grid) * math.sqrt(max(slack, 0.0)), slack)


def fit_decay_exponent(Ns, lhs) -> float:
    """lambda_hat from lhs ~ c N^{-lambda/2} by least squares in log-log."""
    slope = np.polyfit(np.log(np.asarray(Ns, dtype=float)), np.log(np.asarray(lhs, dtype=float)), 1)[0]
    return float(-2.0 * slope)


def _canonical(config):
    return tuple(map(tuple, np.round(config, 12)))


def symmetrize(configs, weights):
    """Spread each configuration uniformly over all orderings of its particles."""
    configs = np.asarray(configs, dtype=float)
    out_c, out_w = [], []
    N = configs.shape[1]
    perms = list(itertools.permutations(range(N)))
    for c, w in zip(configs, weights):
        for p in perms:
            out_c.append(c[list(p)])
            out_w.append(w / len(perms))
    return np.array(out_c), np.array(out_w)


def _assert_symmetric(configs, weights, tol=1e-12):
    table = {}
    for c, w in zip(configs, weights):
        key = _canonical(c)
        table[key] = table.get(key, 0.0) + w
    N = configs.shape[1]
    for key, w in table.items():
        c = list(key)
        for a in range(N - 1):
            swapped = c.copy()
            swapped[a], swapped[a + 1] = swapped[a + 1], swapped[a]
            if abs(table.get(tuple(swapped), 0.0) - w) > tol:
                raise ValueError(f"mixture is not symmetric under swapping particles {a} and {a + 1}")


def marginal_identity_check(configs, weights, mu, phi, grid: GridSpec, symmetric: bool = False):
    """Both sides of int phi (rho_{N:1} - mu) = (1/N) E_rho[sum_i phi(x_i) - N int phi mu].

    ``configs`` is (K, N, 2), ``weights`` (K,). Pass ``symmetric=True`` to
    symmetrize the mixture first; otherwise an asymmetric mixture is an error.
    """
    configs = np.asarray(configs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if configs.ndim != 3 or configs.shape[2] != 2 or configs.shape[0] != weights.size:
        raise ValueError("configs must be (K, N, 2) with one weight per configuration")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("mixture weights must be non-negative and sum to 1")
    if symmetric:
        configs, weights = symmetrize(configs, weights)
    else:
        _assert_symmetric(configs, weights)
    N = configs.shape[1]
    Xg, Yg = grid.mesh()
    mass = grid.integrate(np.asarray(phi(Xg, Yg), dtype=float) * np.ones_like(Xg) * mu)
    vals = np.asarray(phi(configs[..., 0], configs[..., 1]), dtype=float) * np.ones(configs.shape[:2])
    lhs = float(np.dot(weights, vals[:, 0])) - mass
    rhs = float(np.dot(weights, vals.sum(axis=1) - N * mass)) / N
    return lhs, rhs


@dataclass
class SerfatyReport:
    N: int
    lhs: float
    fN: float
    grad_sup: float
    w1inf: float
    mu_sup: float
    C_fit: float
    terms: dict = field(default_factory=dict)


def serfaty_rhs_report(X, mu, psi_grid, grid: GridSpec, psi_particles=None) -> SerfatyReport:
    """Commutator LHS next to the structure of its upper bound.

    The bound reads C g (f + C m N^{-1/3} + log N/N) + 2 C w m N^{-1/2} with
    g = ||grad psi||_inf, w = ||psi||_{W^{1,inf}}, m = 1 + ||mu||_inf.
    ``C_fit`` is the smallest C making it an equality.
    """
    x = _positions(X)
    N = x.shape[0]
    psi_grid = np.asarray(psi_grid, dtype=float)
    lhs = abs(f_prime_N(x, mu, psi_grid, grid, psi_particles))
    jac = np.stack([np.stack(np.gradient(c, grid.h, edge_order=2)) for c in psi_grid])
    g = float(np.max(np.sqrt(np.sum(jac**2, axis=(0, 1)))))
    w = float(np.max(np.hypot(psi_grid[0], psi_grid[1]))) + g
    m = 1.0 + float(np.max(np.abs(mu)))
    fN = f_N(x, mu, grid)
    a = g * m * N ** (-1.0 / 3.0)
    b = g * (fN + math.log(N) / N) + 2.0 * w * m * N ** (-0.5)
    if lhs == 0.0:
        C = 0.0
    elif a > 0:
        C = (-b + math.sqrt(b * b + 4 * a * lhs)) / (2 * a)
    else:
        C = lhs / b if b > 0 else math.inf
    return SerfatyReport(N, lhs, fN, g, w, m - 1.0, C, {"a": a, "b": b})
