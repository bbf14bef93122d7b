import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gyrolim.densities import SmoothBump
from gyrolim.nbody import (
    CollisionError, IntegratorConfig, MagneticParams, ParticleEnsemble, hamiltonian, interaction_energy,
    mean_field_force, rotation_update, run_simulation, sample_monokinetic, sample_positions, sample_positions_sobol,
    step_rk4, step_strang,
)

TWO_PI = 2 * math.pi
coord = st.floats(-5, 5, allow_nan=False)


def random_ensemble(seed, N, eps=0.1, spread=1.0, vscale=0.3):
    rng = np.random.default_rng(seed)
    return ParticleEnsemble(rng.uniform(-spread, spread, (N, 2)), vscale * rng.normal(size=(N, 2)), eps)


def evolve(ens, dt, T, step, params):
    cfg = IntegratorConfig(dt=dt, T=T)
    for _ in range(int(round(T / dt))):
        ens = step(ens, dt, params, cfg)
    return ens


# types ---------------------------------------------------------------------

def test_ensemble_validation():
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((0, 2)), np.zeros((0, 2)), 0.1)
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((2, 2)), np.zeros((3, 2)), 0.1)
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((1, 2)), np.zeros((1, 2)), 0.0)


def test_params_validation_and_generator():
    with pytest.raises(ValueError):
        MagneticParams(eps=0.0)
    MagneticParams(eps=0.0, magnetic=False)
    assert np.array_equal(MagneticParams().J, [[0, 2], [-2, 0]])
    for kw in ({"dt": 0}, {"delta_min": 0}, {"scheme": "euler"}, {"force": "fmm"}):
        with pytest.raises(ValueError):
            IntegratorConfig(**kw)


# forces --------------------------------------------------------------------

def test_two_particle_force_by_hand():
    F = mean_field_force([[0.0, 0.0], [1.0, 0.0]])
    assert np.allclose(F[0], [1 / (4 * math.pi), 0.0], rtol=1e-14)
    assert np.array_equal(F[1], -F[0])


def test_single_particle_has_no_force():
    assert np.array_equal(mean_field_force([[0.3, 0.4]]), [[0.0, 0.0]])


def test_triangle_repulsion_is_radially_outward():
    angles = np.array([0, 2 * math.pi / 3, 4 * math.pi / 3]) + 0.2
    x = np.column_stack([np.cos(angles), np.sin(angles)])
    push = -mean_field_force(x)  # acceleration direction of the repulsive interaction
    mags = np.linalg.norm(push, axis=1)
    assert np.allclose(mags, mags[0], rtol=1e-13)
    assert np.allclose(push / mags[:, None], x, atol=1e-13)


@given(st.integers(0, 10_000), st.integers(2, 60))
def test_forces_sum_to_zero(seed, N):
    F = mean_field_force(np.random.default_rng(seed).uniform(-1, 1, (N, 2)))
    assert np.max(np.abs(F.sum(axis=0))) <= 1e-12 * max(1.0, np.abs(F).max())


def test_collision_raises_with_pair():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1e-12]])
    with pytest.raises(CollisionError) as err:
        mean_field_force(x, delta_min=1e-9)
    assert err.value.pair == (1, 2)
    assert err.value.distance == pytest.approx(1e-12)


def test_barnes_hut_close_to_direct(rng):
    x = rng.normal(size=(3000, 2))
    Fd = mean_field_force(x)
    Fb = mean_field_force(x, method="barnes-hut", theta=0.5)
    assert np.linalg.norm(Fb - Fd) / np.linalg.norm(Fd) < 5e-3


# exact rotation ------------------------------------------------------------

def test_quarter_turn_without_force():
    eps = 0.3
    out = rotation_update([1.0, 0.0], [0.0, 0.0], math.pi * eps / 2, eps)
    assert np.allclose(out, [0.0, -1.0], atol=1e-15)


@given(st.tuples(coord, coord), st.floats(0, 100), st.floats(1e-3, 10))
def test_rotation_is_isometry_without_force(xi, dt, eps):
    out = rotation_update(xi, [0.0, 0.0], dt, eps)
    assert abs(np.linalg.norm(out) - np.linalg.norm(xi)) <= 1e-15 * max(1.0, 4 * np.linalg.norm(xi))


@given(st.tuples(coord, coord), st.floats(0, 100), st.floats(1e-3, 10), st.sampled_from([1, -1]))
def test_drift_velocity_is_fixed_point(F, dt, eps, s):
    F = np.asarray(F)
    star = s * np.array([-F[1], F[0]])
    assert np.allclose(rotation_update(star, F, dt, eps, s), star, atol=1e-14 * (1 + np.abs(F).max()))


def test_rotation_matches_ode_solution():
    from scipy.integrate import solve_ivp

    eps, dt, F = 0.2, 0.7, np.array([0.3, -0.1])
    for s in (1, -1):
        sol = solve_ivp(lambda t, v: -(s * np.array([-v[1], v[0]]) + F) / eps, (0, dt), [0.5, 0.2],
                        rtol=1e-12, atol=1e-14)
        assert np.allclose(rotation_update([0.5, 0.2], F, dt, eps, s), sol.y[:, -1], atol=1e-9)


# stepping ------------------------------------------------------------------

def test_strang_second_order_against_reference():
    params = MagneticParams(eps=0.5)
    ens = random_ensemble(3, 4, eps=0.5)
    T = 0.5
    ref = evolve(ens, 1e-4, T, step_rk4, params)
    dts = [0.02, 0.01, 0.005]
    errs = [np.linalg.norm(evolve(ens, dt, T, step_strang, params).positions - ref.positions) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_single_particle_gyration_radius():
    eps = 0.05
    xi0 = np.array([0.6, -0.8])
    x0 = np.array([0.1, 0.2])
    centre = x0 - eps * np.array([-xi0[1], xi0[0]])
    ens = ParticleEnsemble([x0], [xi0], eps)
    params = MagneticParams(eps)
    cfg = IntegratorConfig(dt=1e-4, T=1.0)
    radii = []
    for _ in range(int(round(2 * math.pi * eps / 1e-4))):
        ens = step_strang(ens, 1e-4, params, cfg)
        radii.append(np.linalg.norm(ens.positions[0] - centre))
    assert np.max(np.abs(np.array(radii) - eps * np.linalg.norm(xi0))) < 1e-6 * eps
    assert np.linalg.norm(ens.velocities[0]) == pytest.approx(1.0, abs=1e-12)


def test_unmagnetized_step_local_error_third_order():
    params = MagneticParams(eps=1.0, magnetic=False)
    ens = random_ensemble(5, 5)
    errs = []
    dts = [0.02, 0.01, 0.005]
    for dt in dts:
        a = step_strang(ens, dt, params)
        b = step_rk4(ens, dt, params)
        errs.append(np.linalg.norm(a.positions - b.positions) + np.linalg.norm(a.velocities - b.velocities))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 2.7 <= slope <= 3.3


# energy --------------------------------------------------------------------

def test_hamiltonian_unit_distance_at_rest_vanishes():
    ens = ParticleEnsemble([[0, 0], [1, 0]], np.zeros((2, 2)), 0.1)
    assert hamiltonian(ens) == 0.0


def test_hamiltonian_conserved_by_fine_reference_steps():
    ens = random_ensemble(11, 8, eps=0.1)
    params = MagneticParams(0.1)
    h0 = hamiltonian(ens, params)
    end = evolve(ens, 1e-4, 0.1, step_rk4, params)
    assert abs(hamiltonian(end, params) - h0) < 1e-8


@given(st.floats(0, 2 * math.pi), st.integers(0, 1000))
def test_interaction_energy_rotation_invariant(angle, seed):
    x = np.random.default_rng(seed).uniform(-1, 1, (12, 2))
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    assert interaction_energy(x @ R.T) == pytest.approx(interaction_energy(x), abs=1e-13)


def test_hamiltonian_scalings():
    ens = random_ensemble(2, 10, eps=0.25)
    kin = 0.25 * np.sum(ens.velocities**2) / 20
    assert hamiltonian(ens, MagneticParams(0.25)) == pytest.approx(kin + interaction_energy(ens.positions), rel=1e-14)
    off = MagneticParams(0.25, magnetic=False)
    assert hamiltonian(ens, off) == pytest.approx(np.sum(ens.velocities**2) / 20 + interaction_energy(ens.positions))


def test_energy_drift_small_over_unit_time():
    dens = SmoothBump(R=1.0)
    ens = sample_monokinetic(dens, dens.velocity, 64, 7, eps=0.1)
    params = MagneticParams(0.1, gyro_sign=1)
    res = run_simulation(ens, IntegratorConfig(dt=1e-3, T=1.0), [lambda t, e: {"h": hamiltonian(e, params)}],
                         stride=100, params=params)
    h = [r["h"] for r in res.records]
    assert res.status == "ok"
    assert abs(h[-1] - h[0]) / (abs(h[0]) + 1) < 1e-6


# sampling ------------------------------------------------------------------

def test_sample_mean_within_three_standard_errors():
    dens = SmoothBump(R=1.0, center=(0.3, -0.2))
    x = sample_positions(dens, 100_000, 1)
    se = x.std(axis=0) / math.sqrt(len(x))
    assert np.all(np.abs(x.mean(axis=0) - np.array([0.3, -0.2])) < 3 * se)


def test_monokinetic_velocities_and_determinism():
    dens = SmoothBump(R=1.0)
    a = sample_monokinetic(dens, dens.velocity, 200, 42, eps=0.1)
    b = sample_monokinetic(dens, dens.velocity, 200, 42, eps=0.1)
    assert np.array_equal(a.velocities, dens.velocity(a.positions))
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.velocities, b.velocities)


def test_rotating_frame_velocities():
    dens = SmoothBump(R=1.0)
    e = sample_monokinetic(dens, dens.velocity, 50, 1, eps=0.2, frame="rotating")
    x = e.positions
    assert np.allclose(e.velocities, np.column_stack([x[:, 1], -x[:, 0]]) / 0.4)
    with pytest.raises(ValueError):
        sample_monokinetic(dens, dens.velocity, 5, 1, frame="lab")


def test_sobol_points_integrate_smooth_functions_accurately():
    from scipy import integrate

    dens = SmoothBump(R=1.0, center=(0.2, -0.1))
    exact, _ = integrate.quad(lambda r: 2 * math.pi * r * dens.radial(r) * math.exp(-r * r), 0, 1)
    x = sample_positions_sobol(dens, 4096, 3) - np.array([0.2, -0.1])
    assert np.all(np.hypot(x[:, 0], x[:, 1]) <= 1.0)
    assert abs(np.mean(np.exp(-np.sum(x**2, axis=1))) - exact) < 1e-4


def test_sobol_sampling_deterministic_and_selectable():
    dens = SmoothBump(R=1.0)
    a = sample_monokinetic(dens, dens.velocity, 300, 5, eps=0.1, sampling="sobol")
    b = sample_monokinetic(dens, dens.velocity, 300, 5, eps=0.1, sampling="sobol")
    assert np.array_equal(a.positions, b.positions)
    assert a.min_separation() > 0
    with pytest.raises(ValueError):
        sample_monokinetic(dens, dens.velocity, 10, 5, sampling="grid")


def test_sampling_gives_up_after_budget():
    class Empty(SmoothBump):
        def __call__(self, x, y):
            return np.zeros(np.shape(x))

    with pytest.raises(RuntimeError):
        sample_positions(Empty(R=1.0), 10, 0, max_rounds=3)


# simulation driver ---------------------------------------------------------

def test_resting_free_particle_stays_put():
    ens = ParticleEnsemble([[0.2, 0.3]], [[0.0, 0.0]], 1.0)
    res = run_simulation(ens, IntegratorConfig(dt=0.1, T=1.0), [lambda t, e: {"x": e.positions.copy()}],
                         stride=1, params=MagneticParams(1.0, magnetic=False))
    assert all(np.array_equal(r["x"], [[0.2, 0.3]]) for r in res.records)
    assert len(res.records) == 11


def test_stride_zero_rejected():
    with pytest.raises(ValueError):
        run_simulation(random_ensemble(0, 3), IntegratorConfig(dt=0.1, T=0.2), stride=0)


def test_collision_aborts_with_partial_records():
    # two particles shot at each other without magnetic field: the guard trips
    ens = ParticleEnsemble([[-0.0125, 0.0], [0.0125, 0.0]], [[50.0, 0.0], [-50.0, 0.0]], 1.0)
    res = run_simulation(ens, IntegratorConfig(dt=1e-4, T=0.01, delta_min=1e-3), [lambda t, e: {"t": t}],
                         stride=1, params=MagneticParams(1.0, magnetic=False))
    assert res.status == "collision"
    assert res.records and res.records[0]["t"] == 0.0


def test_should_stop_ends_run():
    res = run_simulation(random_ensemble(0, 3), IntegratorConfig(dt=0.01, T=1.0), [lambda t, e: {}], stride=5,
                         should_stop=lambda: "enough")
    assert res.status == "stopped" and len(res.times) == 2


def test_simulation_is_deterministic():
    cfg = IntegratorConfig(dt=0.01, T=0.2)
    a = run_simulation(random_ensemble(9, 40), cfg, stride=5).final
    b = run_simulation(random_ensemble(9, 40), cfg, stride=5).final
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.velocities, b.velocities)
