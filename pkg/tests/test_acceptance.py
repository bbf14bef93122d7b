"""Acceptance criteria at their stated tolerances; the terminal summary prints one line per criterion."""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from gyrolim.cli.main import main
from gyrolim.cli.tables import column, read_csv
from gyrolim.densities import ChiGaussian, SmoothBump
from gyrolim.energy import classical_modulated_energy, f_N, lower_bound_slack, marginal_identity_check, slack_tolerance
from gyrolim.euler import VortexBlobs, fields_from_vorticity, step_euler
from gyrolim.kernels import GaussianKernel, GridSpec, free_space_convolve
from gyrolim.nbody import ParticleEnsemble
from gyrolim.quantize.hermite import HermiteTruncation
from gyrolim.quantize.initial_energy import GyroSymbol, lattice_phase_points, initial_energy_terms, sine_drift
from gyrolim.quantize.toeplitz import kinetic_trace_identity, quadratic_symbol_identities

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


def run_cli(kind, cfg, out):
    code = main([kind, "--config", str(CONFIGS / cfg), "--out", str(out)])
    return code, Path(out) / kind


def within(start, budget_s):
    assert time.perf_counter() - start < budget_s, f"runtime above {budget_s} s"


@pytest.mark.criterion(1, "lower-bound slack on 200 random configurations")
def test_criterion_1_lower_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    grid = GridSpec(2.0, 256)
    X, Y = grid.mesh()
    for k in range(200):
        N = int(rng.integers(4, 257))
        R = float(rng.uniform(0.4, 1.2))
        c = tuple(rng.uniform(-0.3, 0.3, 2))
        mu = SmoothBump(R=R, center=c)(X, Y)
        mu /= grid.integrate(mu)
        r = R * np.sqrt(rng.uniform(size=N))
        a = rng.uniform(0, 2 * math.pi, N)
        x = np.column_stack([c[0] + r * np.cos(a), c[1] + r * np.sin(a)])
        slack = lower_bound_slack(x, mu, grid)
        assert slack >= -slack_tolerance(mu), f"configuration {k}: slack {slack:.3e}"
    within(t0, 60)


@pytest.mark.criterion(2, "kinetic trace identity at M = 24 with convergence in M")
def test_criterion_2_trace_identity():
    t0 = time.perf_counter()
    z, w = lattice_phase_points(SmoothBump(R=1.0), 0.5, sine_drift(0.1))
    errs = {M: kinetic_trace_identity(z, w, 0.5, 0.1, M).relerr for M in (16, 24, 32)}
    assert errs[24] < 1e-4, errs
    assert errs[32] < errs[16], errs
    within(t0, 120)


@pytest.mark.criterion(3, "Toeplitz quadratic-symbol identities")
def test_criterion_3_quadratic_identities():
    t0 = time.perf_counter()
    for hbar in (0.1, 0.01):
        for M in (8, 16, 24):
            rep = quadratic_symbol_identities(HermiteTruncation(hbar, M))
            assert rep.max_error < 1e-8, (hbar, M, rep)
    within(t0, 60)


@pytest.mark.criterion(4, "initial-energy limit trends at hbar = eps^2")
def test_criterion_4_limit_trends():
    t0 = time.perf_counter()
    reps = [initial_energy_terms(GyroSymbol(eps, eps**2, ChiGaussian(), sine_drift(0.1), GridSpec(4.0, 512)))
            for eps in (0.2, 0.1, 0.05)]
    for r in reps:
        assert abs(r.kinetic_correction - (r.hbar / (4 * r.eps) + r.eps * r.hbar)) < 1e-12
    terms = {
        "kinetic correction": [r.kinetic_correction for r in reps],
        "confinement": [r.confinement for r in reps],
        "|I|": [abs(r.I) for r in reps],
        "|J|": [abs(r.J) for r in reps],
    }
    within(t0, 300)
    bad = {k: ", ".join(f"{v:.3e}" for v in vals) for k, vals in terms.items() if not decreasing(vals)}
    assert not bad, f"not monotone: {bad}"


@pytest.mark.criterion(5, "Hamiltonian drift below 1e-6 (N = 64, eps = 0.1, T = 1)")
def test_criterion_5_energy_conservation(tmp_path):
    t0 = time.perf_counter()
    code, run = run_cli("nbody", "nbody_conservation.cfg", tmp_path)
    header, rows = read_csv(run / "nbody.csv")
    h = column(header, rows, "h_eps")
    assert abs(h[-1] - h[0]) / abs(h[0]) < 1e-6
    assert column(header, rows, "t")[-1] == pytest.approx(1.0)
    assert code == 0
    within(t0, 60)


@pytest.mark.slow
@pytest.mark.criterion(6, "modulated energy and weak error decrease along the diagonal sweep")
def test_criterion_6_convergence_trend(tmp_path):
    t0 = time.perf_counter()
    code, run = run_cli("sweep", "sweep_diagonal.cfg", tmp_path)
    header, rows = read_csv(run / "sweep.csv")
    assert column(header, rows, "N") == [1024, 4096, 16384]
    assert column(header, rows, "eps") == [0.2, 0.1, 0.05]
    assert column(header, rows, "status") == ["ok"] * 3
    E = column(header, rows, "E_tfinal")
    weak = column(header, rows, "weak_err_phi1")
    assert decreasing(E), E
    assert decreasing(weak), weak
    assert code == 0
    within(t0, 1800)


@pytest.mark.criterion(7, "median coercivity LHS decreases in N for both test functions")
def test_criterion_7_coercivity(tmp_path):
    t0 = time.perf_counter()
    code, run = run_cli("coercivity", "coercivity.cfg", tmp_path)
    header, rows = read_csv(run / "coercivity_summary.csv")
    for phi in ("phi1", "phi2"):
        sel = [r for r in rows if r[0] == phi]
        assert [r[1] for r in sel] == [64, 256, 1024]
        assert decreasing([r[2] for r in sel]), (phi, [r[2] for r in sel])
    seeds = read_csv(run / "coercivity.csv")[1]
    assert len(seeds) == 2 * 3 * 20
    assert code == 0
    within(t0, 120)


@pytest.mark.criterion(8, "algebraic oracles: E2 = f_N/2, marginal identity, frakU, Gaussian semigroup")
def test_criterion_8_algebraic_oracles():
    t0 = time.perf_counter()
    grid = GridSpec(2.0, 256)
    X, Y = grid.mesh()
    om = SmoothBump(R=1.0)(X, Y)
    om /= grid.integrate(om)
    fields = fields_from_vorticity(om, grid, 0.1)
    rng = np.random.default_rng(8)
    for N in (8, 128, 1024):
        x = rng.uniform(-0.9, 0.9, (N, 2))
        rep = classical_modulated_energy(ParticleEnsemble(x, np.zeros_like(x), 0.1), fields)
        assert abs(rep.E2 - f_N(x, fields.mu, grid) / 2) < 1e-10

    def phi(x, y):
        return np.cos(x) * y

    for K, N in ((1, 3), (2, 2), (3, 3)):
        w = rng.uniform(0.2, 1, K)
        lhs, rhs = marginal_identity_check(rng.uniform(-1, 1, (K, N, 2)), w / w.sum(), om, phi, grid, symmetric=True)
        assert abs(lhs - rhs) < 1e-12

    g3 = GridSpec(3.0, 128)
    X3, Y3 = g3.mesh()
    vort = np.exp(-(X3**2 + Y3**2) / 0.18) + 0.5 * np.exp(-((X3 - 0.6) ** 2 + (Y3 + 0.4) ** 2) / 0.08)
    f = fields_from_vorticity(vort / g3.integrate(vort), g3)
    G = f.grad_u
    assert np.max(np.abs(f.frakU + 2 * (G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]))) <= 10 * g3.h**2

    g8 = GridSpec(8.0, 512)
    X8, Y8 = g8.mesh()
    for a, b in ((0.05, 0.5), (0.5, 0.5)):
        out = free_space_convolve(GaussianKernel(a)(X8, Y8), g8, GaussianKernel(b))
        assert np.max(np.abs(out - GaussianKernel(a + b)(X8, Y8))) < 1e-6
    within(t0, 60)


@pytest.mark.criterion(9, "Euler sanity: radial steady state and co-rotating pair period")
def test_criterion_9_euler_sanity(tmp_path):
    t0 = time.perf_counter()
    code, run = run_cli("euler", "euler_steady.cfg", tmp_path)
    header, rows = read_csv(run / "euler.csv")
    assert column(header, rows, "t")[-1] == pytest.approx(1.0)
    assert column(header, rows, "l1_change")[-1] < 0.01
    assert code == 0

    d = 0.5
    blobs = VortexBlobs(np.array([[-d / 2, 0.0], [d / 2, 0.0]]), np.array([0.5, 0.5]), 1e-3)
    period = 4 * math.pi**2 * d**2
    steps = 400
    for _ in range(steps):
        blobs = step_euler(blobs, period / steps)
    assert np.max(np.linalg.norm(blobs.positions - [[-d / 2, 0.0], [d / 2, 0.0]], axis=1)) < 1e-4 * d
    within(t0, 120)
