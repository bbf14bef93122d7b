"""Median lower-bound slack for i.i.d. samples as N grows."""

from dataclasses import dataclass, field

import numpy as np

from _cli import parse
from gyrolim.densities import SmoothBump
from gyrolim.energy import lower_bound_slack
from gyrolim.kernels import GridSpec, free_space_convolve
from gyrolim.nbody import sample_positions


@dataclass
class Config:
    Ns: list = field(default_factory=lambda: [64, 256, 1024, 4096])
    seeds: int = 20
    seed: int = 1


def main(cfg: Config):
    grid = GridSpec(2.0, 256)
    dens = SmoothBump(R=1.0)
    X, Y = grid.mesh()
    mu = dens(X, Y)
    mu /= grid.integrate(mu)
    pot = free_space_convolve(mu, grid, "V")
    for i, N in enumerate(cfg.Ns):
        s = [lower_bound_slack(sample_positions(dens, N, np.random.SeedSequence([cfg.seed, i, k])), mu, grid, pot)
             for k in range(cfg.seeds)]
        print(f"N={N:<6d} median slack={np.median(s):.4e} min={min(s):.4e}")


if __name__ == "__main__":
    main(parse(Config, __doc__))
