"""Gap between the interaction energy against omega and against mu = omega + eps frakU."""

from dataclasses import dataclass, field

import numpy as np

from _cli import parse
from gyrolim.densities import SmoothBump
from gyrolim.energy import classical_modulated_energy
from gyrolim.euler import fields_from_vorticity
from gyrolim.kernels import GridSpec
from gyrolim.nbody import sample_monokinetic


@dataclass
class Config:
    eps: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    N: int = 2048
    seed: int = 5
    n: int = 256


def main(cfg: Config):
    grid = GridSpec(2.0, cfg.n)
    dens = SmoothBump(R=1.0)
    X, Y = grid.mesh()
    om = dens(X, Y)
    om /= grid.integrate(om)
    print(f"{'eps':>7} {'E2':>12} {'E*':>12} {'|E*-E2|/eps':>12}")
    for eps in cfg.eps:
        ens = sample_monokinetic(dens, dens.velocity, cfg.N, cfg.seed, eps=eps)
        rep = classical_modulated_energy(ens, fields_from_vorticity(om, grid, eps), independent_e2=False)
        print(f"{eps:>7g} {rep.E2:>12.5e} {rep.E_star:>12.5e} {abs(rep.E_star - rep.E2) / eps:>12.5e}")


if __name__ == "__main__":
    main(parse(Config, __doc__))
