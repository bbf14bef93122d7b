"""Commutator functional against its bound structure: fitted constant across N."""

from dataclasses import dataclass, field

import numpy as np

from _cli import parse
from gyrolim.densities import SmoothBump
from gyrolim.energy import serfaty_rhs_report
from gyrolim.euler import fields_from_vorticity
from gyrolim.kernels import GridSpec
from gyrolim.nbody import sample_positions


@dataclass
class Config:
    Ns: list = field(default_factory=lambda: [128, 256, 512, 1024, 2048])
    seeds: int = 20
    seed: int = 11
    L: float = 2.0
    n: int = 256


def main(cfg: Config):
    grid = GridSpec(cfg.L, cfg.n)
    dens = SmoothBump(R=1.0)
    X, Y = grid.mesh()
    om = dens(X, Y)
    om /= grid.integrate(om)
    fields = fields_from_vorticity(om, grid)
    print(f"{'N':>6} {'median lhs':>12} {'median C':>10}")
    Cs = []
    for i, N in enumerate(cfg.Ns):
        reps = [serfaty_rhs_report(sample_positions(dens, N, np.random.SeedSequence([cfg.seed, i, s])),
                                   om, fields.u, grid) for s in range(cfg.seeds)]
        C = float(np.median([r.C_fit for r in reps]))
        Cs.append(C)
        print(f"{N:>6d} {np.median([r.lhs for r in reps]):>12.4e} {C:>10.3e}")
    print(f"max/min fitted C: {max(Cs) / min(Cs):.2f} (stable within a factor 4: {max(Cs) / min(Cs) < 4})")


if __name__ == "__main__":
    main(parse(Config, __doc__))
