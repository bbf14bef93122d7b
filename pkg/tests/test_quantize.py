import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gyrolim.densities import ChiGaussian, SmoothBump
from gyrolim.kernels import GridError, GridSpec
from gyrolim.quantize import heatpoly as hp
from gyrolim.quantize.hermite import (
    HermiteTruncation, coherent_coefficients_2d, coherent_overlap, coherent_state,
)
from gyrolim.quantize.initial_energy import (
    GyroSymbol, RegimeWarning, lattice_phase_points, initial_energy_terms, sine_drift, smoothed_density,
)
from gyrolim.quantize.phasespace import (
    husimi_direct, husimi_from_wigner, husimi_projector, phase_gaussian, product_transform, projector_kernel,
    toeplitz_kernel, wigner_transform,
)
from gyrolim.quantize.toeplitz import (
    density_operator, kinetic_closed_form, kinetic_trace_identity, quadratic_symbol_identities, toeplitz_matrix,
)


def plane(L=6.0, n=241):
    g = np.linspace(-L, L, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return g, np.stack([X, Y], axis=-1), (g[1] - g[0]) ** 2


# coherent states -----------------------------------------------------------

def test_coherent_state_normalized():
    _, x, dA = plane()
    psi = coherent_state([0.3, -0.5], [1.0, 0.2], 0.3, x)
    assert np.sum(np.abs(psi) ** 2) * dA == pytest.approx(1.0, abs=1e-8)


def test_overlap_against_grid_inner_product():
    _, x, dA = plane()
    hbar = 0.3
    z1, z2 = ([0.3, -0.5], [1.0, 0.2]), ([-0.2, 0.1], [0.4, 0.9])
    grid_ip = np.sum(np.conj(coherent_state(*z1, hbar, x)) * coherent_state(*z2, hbar, x)) * dA
    closed = coherent_overlap(*z1, *z2, hbar)
    assert abs(grid_ip - closed) < 1e-6
    d2 = sum((a - b) ** 2 for a, b in zip(z1[0] + z1[1], z2[0] + z2[1]))
    assert abs(closed) ** 2 == pytest.approx(math.exp(-d2 / (2 * hbar)), rel=1e-12)


def test_centred_state_is_positive_bump():
    g, x, _ = plane(3.0, 61)
    psi = coherent_state([0.0, 0.0], [0.0, 0.0], 0.5, x)
    assert np.all(np.imag(psi) == 0) and np.all(np.real(psi) > 0)
    assert np.unravel_index(np.argmax(np.real(psi)), psi.shape) == (30, 30)


def test_basis_functions_orthonormal():
    tr = HermiteTruncation(0.2, 12)
    x = np.linspace(-4, 4, 4001)
    F = tr.functions(x)
    G = F @ F.T * (x[1] - x[0])
    assert np.max(np.abs(G - np.eye(13))) < 1e-12


def test_coefficients_match_projection():
    hbar, M = 0.4, 30
    tr = HermiteTruncation(hbar, M)
    x = np.linspace(-6, 6, 6001)
    F = tr.functions(x)
    psi = coherent_state([0.4], [-0.3], hbar, x)
    proj = F @ psi * (x[1] - x[0])
    from gyrolim.quantize.hermite import coherent_coefficients

    assert np.max(np.abs(proj - coherent_coefficients(0.4, -0.3, hbar, M))) < 1e-10


def test_truncation_validation():
    with pytest.raises(ValueError):
        HermiteTruncation(0.0, 8)
    with pytest.raises(ValueError):
        HermiteTruncation(0.1, 3)


# Toeplitz ------------------------------------------------------------------

def test_single_atom_gives_projector():
    hbar = 0.2
    tr = HermiteTruncation(hbar, 20)
    z0 = np.array([[0.2, -0.1, 0.1, 0.3]])
    A = toeplitz_matrix(z0, [(2 * math.pi * hbar) ** 2], tr)
    ev = np.linalg.eigvalsh(A)
    assert np.trace(A).real == pytest.approx(1.0, abs=1e-8)
    assert ev[-1] == pytest.approx(1.0, abs=1e-8)
    assert np.max(np.abs(ev[:-1])) < 1e-8


def test_constant_symbol_quantizes_to_identity():
    hbar, M = 0.5, 4
    tr = HermiteTruncation(hbar, M)
    g = np.arange(-6.0, 6.0 + 1e-9, 0.5)
    Q1, Q2, P1, P2 = np.meshgrid(g, g, g, g, indexing="ij")
    z = np.column_stack([Q1.ravel(), Q2.ravel(), P1.ravel(), P2.ravel()])
    A = toeplitz_matrix(z, np.full(len(z), 0.5**4), tr)
    low = HermiteTruncation(hbar, M).interior_mask(2)
    assert np.max(np.abs(A[np.ix_(low, low)] - np.eye(low.sum()))) < 1e-3


@given(st.integers(0, 10_000))
def test_toeplitz_self_adjoint_and_positive(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(scale=0.6, size=(30, 4))
    A = toeplitz_matrix(z, rng.uniform(0, 1, 30), HermiteTruncation(0.3, 8))
    assert np.max(np.abs(A - A.conj().T)) <= 1e-12
    assert np.linalg.eigvalsh(A).min() >= -1e-10


def test_density_operator_has_unit_trace():
    rng = np.random.default_rng(1)
    z = rng.normal(scale=0.3, size=(20, 4))
    w = rng.uniform(0, 1, 20)
    R = density_operator(z, w / w.sum(), HermiteTruncation(0.2, 24))
    assert np.trace(R).real == pytest.approx(1.0, abs=1e-8)


def test_toeplitz_rejects_bad_measures():
    tr = HermiteTruncation(0.2, 6)
    with pytest.raises(ValueError):
        toeplitz_matrix(np.zeros((2, 4)), [1.0, -1.0], tr)
    with pytest.raises(ValueError):
        toeplitz_matrix(np.zeros((2, 3)), [1.0, 1.0], tr)


@pytest.mark.parametrize("M", [6, 12, 20])
def test_quadratic_symbol_identities(M):
    rep = quadratic_symbol_identities(HermiteTruncation(0.15, M))
    assert rep.max_error < 1e-8
    assert rep.correction == pytest.approx(0.15, rel=1e-12)


def test_quadratic_correction_linear_in_hbar():
    a = quadratic_symbol_identities(HermiteTruncation(0.2, 10)).correction
    b = quadratic_symbol_identities(HermiteTruncation(0.1, 10)).correction
    assert b == pytest.approx(a / 2, rel=1e-12)


# kinetic trace -------------------------------------------------------------

@pytest.mark.parametrize("eps,hbar", [(0.5, 0.1), (0.2, 0.04)])
def test_kinetic_closed_form_at_atoms(eps, hbar):
    base = hbar / (4 * eps**2) + hbar
    assert kinetic_closed_form([[0, 0, 0, 0]], [1.0], eps, hbar) == pytest.approx(base, rel=1e-15)
    q = np.array([0.3, -0.2])
    p = -np.array([-q[1], q[0]]) / (2 * eps)
    assert kinetic_closed_form([[*q, *p]], [1.0], eps, hbar) == pytest.approx(base, rel=1e-14)


def test_kinetic_trace_exact_at_origin():
    tr = kinetic_trace_identity([[0, 0, 0, 0]], [1.0], 0.5, 0.1, 8)
    assert tr.numeric == pytest.approx(tr.closed_form, rel=1e-12)


def test_kinetic_trace_converges_in_truncation():
    z, w = lattice_phase_points(SmoothBump(R=1.0), 0.5, sine_drift(0.1))
    errs = {M: kinetic_trace_identity(z, w, 0.5, 0.1, M).relerr for M in (16, 24, 32)}
    assert errs[24] < 1e-4
    assert errs[32] < errs[24] < errs[16]


def test_kinetic_trace_rejects_small_basis():
    z, w = lattice_phase_points(SmoothBump(R=1.0), 0.1)
    with pytest.raises(ValueError, match="too small"):
        kinetic_trace_identity(z, w, 0.1, 0.01, 8)


# Wigner / Husimi -----------------------------------------------------------

def test_wigner_of_toeplitz_is_smoothed_symbol():
    hbar = 0.1
    g = np.linspace(-1.2, 1.2, 7)
    Q, P = np.meshgrid(g, g, indexing="ij")
    pts = np.column_stack([Q.ravel(), P.ravel()])
    w = np.exp(-(pts**2).sum(1) / 0.5)
    w /= w.sum()
    x = np.linspace(-2, 2, 41)
    xi = np.linspace(-2, 2, 41)
    W = wigner_transform(toeplitz_kernel(pts, w, hbar), x, xi, hbar)
    expect = sum(wk * phase_gaussian(x, xi, hbar / 2, c) for c, wk in zip(pts, w)) / (2 * math.pi * hbar)
    assert np.max(np.abs(W - expect)) < 1e-6


def test_husimi_of_projector():
    hbar, q0, p0 = 0.2, 0.3, -0.4
    x = np.arange(-2, 2 + 1e-9, 0.1)
    H = husimi_projector(q0, p0, x, x, hbar)
    i, j = np.unravel_index(np.argmax(H), H.shape)
    assert abs(x[i] - q0) <= 0.1 and abs(x[j] - p0) <= 0.1
    expect = phase_gaussian(x, x, hbar, (q0, p0))
    assert np.max(np.abs(H - expect)) < 1e-12
    W = wigner_transform(projector_kernel(q0, p0, hbar), x, x, hbar)
    assert np.max(np.abs(husimi_from_wigner(W, x, x, hbar) - H)) < 1e-5


def test_husimi_nonnegative_and_normalized():
    rng = np.random.default_rng(3)
    pts = rng.normal(scale=0.4, size=(12, 2))
    w = rng.uniform(0, 1, 12)
    hbar = 0.2
    x = np.arange(-4, 4 + 1e-9, 0.1)
    H = husimi_direct(pts, w, x, x, hbar)
    assert H.min() >= 0
    # integral of the Husimi function equals trace/(2 pi hbar) = sum w / (2 pi hbar)^2 * (2 pi hbar)
    assert H.sum() * 0.01 == pytest.approx(w.sum() / (2 * math.pi * hbar), rel=1e-6)


def test_husimi_rejects_coarse_grid():
    x = np.linspace(-2, 2, 11)
    with pytest.raises(GridError):
        husimi_projector(0, 0, x, x, 0.1)


def test_product_transform():
    a, b = np.arange(6.0).reshape(2, 3), np.ones((4, 5))
    T = product_transform(a, b)
    assert T.shape == (2, 3, 4, 5) and T[1, 2, 3, 4] == 5.0


# heat polynomials ----------------------------------------------------------

def test_heat_of_square_norm():
    g = hp.monomial((2, 0)) + hp.monomial((0, 2))
    out = hp.heat_poly_expansion(g, 0.3)
    assert np.allclose(out, g + hp.monomial((0, 0), 0.3), atol=1e-15)


def test_heat_keeps_constants_and_harmonic_cross_term():
    c = hp.monomial((0, 0), 2.5)
    assert np.array_equal(hp.heat_poly_expansion(c, 0.7), c)
    # p . q^perp = -p1 q2 + p2 q1 in variables (q1, q2, p1, p2)
    g = hp.monomial((0, 1, 1, 0), -1.0) + hp.monomial((1, 0, 0, 1))
    assert np.array_equal(hp.heat_poly_expansion(g, 0.7), g)


def random_poly(seed, d=2):
    rng = np.random.default_rng(seed)
    c = hp.zeros(d)
    for idx in np.ndindex(c.shape):
        if sum(idx) <= hp.MAX_DEGREE and rng.uniform() < 0.3:
            c[idx] = rng.normal()
    return c


@given(st.integers(0, 10_000), st.floats(0.01, 1.0))
def test_heat_matches_gaussian_quadrature(seed, hbar):
    c = random_poly(seed)
    g = np.linspace(-2, 2, 9)
    pts = np.column_stack([a.ravel() for a in np.meshgrid(g, g)])
    exact = hp.evaluate(hp.heat_poly_expansion(c, hbar), pts[:, 0], pts[:, 1])
    assert np.allclose(exact, hp.gauss_hermite_smoothing(c, hbar, pts), rtol=1e-10, atol=1e-8)


@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_heat_semigroup(seed, h1, h2):
    c = random_poly(seed)
    two = hp.heat_poly_expansion(hp.heat_poly_expansion(c, h1), h2)
    assert np.allclose(two, hp.heat_poly_expansion(c, h1 + h2), atol=1e-12)


def test_heat_degree_cap():
    with pytest.raises(ValueError):
        hp.monomial((4, 3))


# initial energy ------------------------------------------------------------

def test_smoothed_density_mass_and_convergence():
    grid = GridSpec(4.0, 256)
    X, Y = grid.mesh()
    om = ChiGaussian()(X, Y)
    om = om / grid.integrate(om)
    norms = []
    for hbar in (0.04, 0.02, 0.01):
        rho = smoothed_density(om, grid, hbar)
        assert grid.integrate(rho) == pytest.approx(1.0, abs=1e-10)
        norms.append(math.sqrt(grid.integrate((rho - om) ** 2)))
    assert norms[0] > norms[1] > norms[2]


def test_zero_drift_kinetic_term():
    rep = initial_energy_terms(GyroSymbol(0.2, 0.04, grid=GridSpec(4.0, 256)))
    assert rep.kinetic == pytest.approx(0.04 / 0.8 + 0.2 * 0.04, rel=1e-15)
    assert rep.N == 125


def test_confinement_matches_smoothed_second_moment():
    rep = initial_energy_terms(GyroSymbol(0.2, 0.04, theta=sine_drift(0.1), grid=GridSpec(4.0, 256)))
    assert rep.confinement == pytest.approx(rep.confinement_via_rho, rel=1e-6)
    assert abs(rep.kinetic_correction - rep.kinetic_correction_closed) < 1e-12


def test_interaction_gap_of_order_eps_without_smoothing():
    ratios = []
    for eps in (0.2, 0.1, 0.05):
        rep = initial_energy_terms(GyroSymbol(eps, 1e-10, grid=GridSpec(4.0, 256)))
        ratios.append(abs(rep.J) / eps)
    assert max(ratios) / min(ratios) < 2.0


def test_regime_warning_and_grid_checks():
    with pytest.warns(RegimeWarning):
        rep = initial_energy_terms(GyroSymbol(0.1, 0.1, grid=GridSpec(4.0, 256)))
    assert not rep.in_regime
    with pytest.raises(GridError):
        GyroSymbol(0.1, 0.01, grid=GridSpec(2.0, 256))
    with pytest.raises(ValueError):
        GyroSymbol(0.0, 0.01)


def test_lattice_points_follow_the_drift_sheet():
    z, w = lattice_phase_points(SmoothBump(R=1.0), 0.25, sine_drift(0.2))
    q, p = z[:, :2], z[:, 2:]
    expect = sine_drift(0.2)(q) - np.column_stack([-q[:, 1], q[:, 0]]) / 0.5
    assert np.allclose(p, expect, atol=1e-15)
    assert w.sum() == pytest.approx(1.0) and np.all(w > 0)


def test_coherent_rows_are_tensor_products():
    C = coherent_coefficients_2d([[0.1, 0.2, -0.3, 0.4]], 0.3, 5)
    from gyrolim.quantize.hermite import coherent_coefficients

    a = coherent_coefficients(0.1, -0.3, 0.3, 5)
    b = coherent_coefficients(0.2, 0.4, 0.3, 5)
    assert np.allclose(C[0], np.kron(a, b), atol=1e-15)
