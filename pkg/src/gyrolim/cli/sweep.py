"""Convergence sweep: particles against the Euler flow on a grid of (N, eps)."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gyrolim.cli.config import RunConfig
from gyrolim.cli.tables import write_csv
from gyrolim.densities import make_density
from gyrolim.energy import classical_modulated_energy, pair_energy
from gyrolim.euler import EulerParams, fields_from_blobs, init_blobs_from_vorticity, run_euler
from gyrolim.kernels import GridSpec
from gyrolim.nbody import IntegratorConfig, MagneticParams, hamiltonian, run_simulation, sample_monokinetic

ENERGY_HEADER = ["t", "E", "E1", "E2", "fN", "slack", "h_eps", "min_sep"]
SWEEP_HEADER = ["N", "eps", "hbar", "E_t0", "E_tfinal", "slack_tfinal", "weak_err_phi1", "weak_err_phi2", "status"]


def phi1(x, y):
    return np.exp(-(x**2 + y**2))


def phi2(x, y):
    return x * np.exp(-(x**2 + y**2))


def build_density(name: str, radius: float):
    if name in ("bump", "disk"):
        return make_density(name, R=radius)
    return make_density(name)


@dataclass(frozen=True)
class CellSpec:
    index: int
    N: int
    eps: float
    hbar: float
    seed: int
    dt: float
    T: float
    records: int
    L: float
    n: int
    density: str
    density_radius: float
    sampling: str
    blobs: int
    euler_dt: float
    remesh_every: int
    gyro_sign: int
    magnetic: bool
    confinement: bool
    scheme: str
    force: str
    bh_theta: float
    delta_min: float
    budget_s: float
    out_dir: str

    @property
    def name(self) -> str:
        return f"cell{self.index:02d}_N{self.N}_eps{self.eps:g}"


@dataclass
class CellResult:
    spec: CellSpec
    status: str
    message: str
    rows: list = field(default_factory=list)
    weak_err: tuple = (math.nan, math.nan)
    h_drift: float = math.nan
    seconds: float = 0.0
    energy_csv: str = ""

    def summary_row(self) -> list:
        s = self.spec
        if self.rows:
            e0, ef, slack = self.rows[0][1], self.rows[-1][1], self.rows[-1][5]
        else:
            e0 = ef = slack = math.nan
        return [s.N, s.eps, s.hbar, e0, ef, slack, self.weak_err[0], self.weak_err[1], self.status]


def cell_specs(cfg: RunConfig, out_dir: Path) -> list[CellSpec]:
    if cfg.seed is None:
        raise ValueError("a seed is required for sweeps")
    if cfg.sweep_mode == "diagonal":
        pairs = [(N, e, k) for k, (N, e) in enumerate(zip(cfg.N, cfg.eps))]
    else:
        pairs = [(N, e, k) for N in cfg.N for k, e in enumerate(cfg.eps)]
    specs = []
    for idx, (N, eps, k) in enumerate(pairs):
        ss = np.random.SeedSequence([cfg.seed, idx])
        dt = min(cfg.dt, cfg.dt_eps_ratio * eps) if cfg.dt_eps_ratio > 0 else cfg.dt
        specs.append(CellSpec(
            index=idx, N=N, eps=eps, hbar=cfg.hbar_for(k), seed=int(ss.generate_state(1, np.uint64)[0]),
            dt=dt, T=cfg.T, records=cfg.records, L=cfg.L, n=cfg.n, density=cfg.density,
            density_radius=cfg.density_radius, sampling=cfg.sampling, blobs=cfg.blobs, euler_dt=cfg.euler_dt,
            remesh_every=cfg.remesh_every, gyro_sign=cfg.gyro_sign, magnetic=cfg.magnetic,
            confinement=cfg.confinement, scheme=cfg.scheme, force=cfg.force, bh_theta=cfg.bh_theta,
            delta_min=cfg.delta_min, budget_s=cfg.cell_budget_s, out_dir=str(out_dir),
        ))
    return specs


def run_cell(spec: CellSpec) -> CellResult:
    """Sample monokinetic particles, co-evolve with vortex blobs, write the cell's energy.csv."""
    start = time.perf_counter()
    grid = GridSpec(spec.L, spec.n)
    density = build_density(spec.density, spec.density_radius)
    ens = sample_monokinetic(density, density.velocity, spec.N, np.random.SeedSequence(spec.seed), eps=spec.eps,
                             sampling=spec.sampling)
    blobs0 = init_blobs_from_vorticity(density, spec.blobs, grid)
    traj = run_euler(blobs0, EulerParams(dt=spec.euler_dt, T=spec.T, grid=grid, remesh_every=spec.remesh_every))
    params = MagneticParams(spec.eps, spec.magnetic, spec.gyro_sign)
    icfg = IntegratorConfig(dt=spec.dt, T=spec.T, delta_min=spec.delta_min, scheme=spec.scheme,
                            force=spec.force, theta=spec.bh_theta)
    nsteps = max(1, int(math.ceil(spec.T / spec.dt - 1e-9)))
    stride = max(1, nsteps // spec.records)

    def observe(t, e):
        pair = pair_energy(e.positions)
        fields = fields_from_blobs(traj.blobs_at(t), grid, spec.eps)
        br = classical_modulated_energy(e, fields, spec.confinement, pair=pair, independent_e2=False)
        h = hamiltonian(e, params, spec.delta_min, pair=pair)
        return {"row": [t, br.E, br.E1, br.E2, br.fN, br.slack, h, e.min_separation()]}

    def should_stop():
        spent = time.perf_counter() - start
        if spent > spec.budget_s:
            return f"cell budget of {spec.budget_s:g} s exceeded after {spent:.1f} s"
        return None

    try:
        sim = run_simulation(ens, icfg, [observe], stride, params, should_stop=should_stop)
    except Exception as exc:  # grid escape and similar failures are recorded, not raised
        res = CellResult(spec, "error", f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        return res
    rows = [r["row"] for r in sim.records]
    status = "ok" if sim.status == "ok" else sim.status
    res = CellResult(spec, status, sim.message, rows)
    if rows:
        h = [r[6] for r in rows]
        res.h_drift = abs(h[-1] - h[0]) / max(abs(h[0]), 1e-300)
    if sim.status == "ok" and sim.final is not None:
        blobsT = traj.blobs_at(spec.T)
        x = sim.final.positions
        res.weak_err = tuple(
            abs(float(np.mean(phi(x[:, 0], x[:, 1]))) - float(np.dot(blobsT.gamma, phi(*blobsT.positions.T))))
            for phi in (phi1, phi2)
        )
    path = Path(spec.out_dir) / spec.name / "energy.csv"
    write_csv(path, ENERGY_HEADER, rows)
    res.energy_csv = str(path)
    res.seconds = time.perf_counter() - start
    return res


def _strictly_decreasing(values) -> bool:
    return all(math.isfinite(a) and math.isfinite(b) and b < a for a, b in zip(values, values[1:]))


def run_convergence_sweep(cfg: RunConfig, out_dir, jobs: int = 1, log=print):
    """Run every cell, write sweep.csv, and return (results, files, failures)."""
    out_dir = Path(out_dir)
    specs = cell_specs(cfg, out_dir)
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(specs))) as pool:
            results = list(pool.map(run_cell, specs))
    else:
        results = [run_cell(s) for s in specs]
    for r in results:
        s = r.spec
        log(f"  N={s.N:<6d} eps={s.eps:<6g} status={r.status:<9s} E(T)={r.summary_row()[4]:.4e} "
            f"weak1={r.weak_err[0]:.3e} drift={r.h_drift:.2e} [{r.seconds:.1f} s]")
    files = [Path(r.energy_csv) for r in results if r.energy_csv]
    files.append(write_csv(out_dir / "sweep.csv", SWEEP_HEADER, [r.summary_row() for r in results]))

    failures = []
    for r in results:
        if r.status != "ok":
            failures.append({"check": "cell_status", "cell": r.spec.name, "status": r.status, "message": r.message})
        if cfg.drift_tol > 0 and not r.h_drift < cfg.drift_tol:
            failures.append({"check": "hamiltonian_drift", "cell": r.spec.name, "value": r.h_drift,
                             "tolerance": cfg.drift_tol})
    if cfg.assert_trend and cfg.sweep_mode == "diagonal" and len(results) > 1:
        ef = [r.summary_row()[4] for r in results]
        w1 = [r.weak_err[0] for r in results]
        if not _strictly_decreasing(ef):
            failures.append({"check": "E_tfinal_decreasing", "values": ef})
        if not _strictly_decreasing(w1):
            failures.append({"check": "weak_err_phi1_decreasing", "values": w1})
    return results, files, failures
