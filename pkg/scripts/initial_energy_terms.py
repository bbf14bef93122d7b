"""Initial-energy terms of the quantized data along hbar = eps^k, with a split of J.

J is compared with (hbar/4) ||omega||_2^2 + eps int omega P, its two leading
contributions; when they have opposite signs |J| need not be monotone.
"""

from dataclasses import dataclass, field

from _cli import parse
from gyrolim.densities import ChiGaussian
from gyrolim.euler import fields_from_vorticity
from gyrolim.kernels import GridSpec
from gyrolim.quantize.initial_energy import GyroSymbol, initial_energy_terms, sine_drift


@dataclass
class Config:
    eps: list = field(default_factory=lambda: [0.4, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05])
    hbar_exp: float = 2.0
    theta_amp: float = 0.1
    n: int = 512


def main(cfg: Config):
    grid = GridSpec(4.0, cfg.n)
    omega = ChiGaussian()
    X, Y = grid.mesh()
    om = omega(X, Y)
    om2 = grid.integrate(om**2)
    print(f"{'eps':>6} {'hbar':>9} {'correction':>11} {'confinement':>11} {'I':>11} {'J':>11} {'J model':>11}")
    for eps in cfg.eps:
        hbar = eps**cfg.hbar_exp
        rep = initial_energy_terms(GyroSymbol(eps, hbar, omega, sine_drift(cfg.theta_amp), grid))
        P = fields_from_vorticity(om, grid).P
        model = hbar / 4 * om2 + eps * grid.integrate(om * P)
        print(f"{eps:>6g} {hbar:>9.3e} {rep.kinetic_correction:>11.4e} {rep.confinement:>11.4e} "
              f"{rep.I:>+11.4e} {rep.J:>+11.4e} {model:>+11.4e}")


if __name__ == "__main__":
    main(parse(Config, __doc__))
