"""Observed order of the split integrator against a fine reference solution."""

from dataclasses import dataclass, field

import numpy as np

from _cli import parse
from gyrolim.nbody import IntegratorConfig, MagneticParams, ParticleEnsemble, step_rk4, step_strang


@dataclass
class Config:
    N: int = 8
    eps: float = 0.2
    T: float = 0.5
    dts: list = field(default_factory=lambda: [0.02, 0.01, 0.005, 0.0025])
    seed: int = 0


def evolve(ens, dt, T, step, params):
    cfg = IntegratorConfig(dt=dt, T=T)
    for _ in range(int(round(T / dt))):
        ens = step(ens, dt, params, cfg)
    return ens


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    ens = ParticleEnsemble(rng.uniform(-1, 1, (cfg.N, 2)), 0.3 * rng.normal(size=(cfg.N, 2)), cfg.eps)
    params = MagneticParams(cfg.eps)
    ref = evolve(ens, min(cfg.dts) / 20, cfg.T, step_rk4, params)
    errs = [np.linalg.norm(evolve(ens, dt, cfg.T, step_strang, params).positions - ref.positions) for dt in cfg.dts]
    for dt, e in zip(cfg.dts, errs):
        print(f"dt={dt:<8g} error={e:.3e}")
    print(f"fitted order: {np.polyfit(np.log(cfg.dts), np.log(errs), 1)[0]:.3f}")


if __name__ == "__main__":
    main(parse(Config, __doc__))
