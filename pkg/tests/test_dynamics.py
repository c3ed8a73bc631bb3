import numpy as np
import pytest
from scipy.linalg import null_space

from coherence_transfer import dynamics as dyn
from coherence_transfer.qcore import DensityMatrix
from oracles import dqd_state

RATES = (4.0, 0.1, 1.0)
EMPTY, LEFT, RIGHT = dyn.basis_initial_states()


def test_model_validation():
    with pytest.raises(ValueError):
        dyn.dqd_model(-1, 0.1, 1)
    with pytest.raises(ValueError):
        dyn.LindbladModel(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        dyn.LindbladModel(np.eye(3), ((np.eye(2), 1.0),))


def test_superoperator_matches_direct_derivative():
    m = dyn.dqd_model(*RATES)
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    lhs = (m.superoperator() @ rho.reshape(-1)).reshape(3, 3)
    assert np.allclose(lhs, dyn.lindblad_derivative(m, rho), atol=1e-12)


def test_derivative_traceless_and_hermitian():
    m = dyn.dqd_model(*RATES)
    for rho in (EMPTY, LEFT, RIGHT):
        d = dyn.lindblad_derivative(m, rho)
        assert abs(np.trace(d)) < 1e-14
        assert np.allclose(d, d.conj().T)


def test_stationary_state_has_zero_derivative():
    m = dyn.dqd_model(*RATES)
    v = null_space(m.superoperator())[:, 0].reshape(3, 3)
    v /= np.trace(v)
    assert np.max(np.abs(dyn.lindblad_derivative(m, v))) < 1e-10


def test_matches_matrix_exponential():
    for params in (RATES, (1.0, 2.0, 0.5), (0.0, 0.0, 1.0)):
        m = dyn.dqd_model(*params)
        for rho in (EMPTY, LEFT):
            out = dyn.evolve(m, rho, 2.5).matrix
            assert np.allclose(out, dqd_state(*params, rho.matrix, 2.5), atol=1e-11)


def test_stepwise_and_propagator_agree():
    m = dyn.dqd_model(*RATES)
    a = dyn.evolve(m, LEFT, 1.3, 1e-2, stepwise=True).matrix
    b = dyn.evolve(m, LEFT, 1.3, 1e-2).matrix
    assert np.allclose(a, b, atol=1e-14)


def test_rabi_half_period():
    m = dyn.dqd_model(0.0, 0.0, 1.0)
    out = dyn.evolve(m, LEFT, np.pi / 2)
    assert out.matrix[dyn.RIGHT, dyn.RIGHT].real == pytest.approx(1.0, abs=1e-10)



def test_classical_loading_limit():
    m = dyn.dqd_model(4.0, 0.1, 0.0)
    out = dyn.evolve(m, EMPTY, 10.0).matrix
    assert out[dyn.LEFT, dyn.LEFT].real == pytest.approx(1.0, abs=1e-12)


def test_trace_drift_per_unit_time():
    m = dyn.dqd_model(*RATES)
    t = 12.0
    for rho in (EMPTY, LEFT, RIGHT):
        out = dyn.evolve(m, rho, t)
        assert abs(out.trace - 1.0) / t < 1e-8


def test_rk4_order():
    m = dyn.dqd_model(*RATES)
    assert dyn.rk4_order(m, EMPTY) >= 3.8


def test_halving_dt_error_scaling():
    m = dyn.dqd_model(*RATES)
    exact = dqd_state(*RATES, LEFT.matrix, 2.0)
    e1 = np.max(np.abs(dyn.evolve(m, LEFT, 2.0, 0.1).matrix - exact))
    e2 = np.max(np.abs(dyn.evolve(m, LEFT, 2.0, 0.05).matrix - exact))
    assert 12 < e1 / e2 < 20


def test_trajectory_matches_evolve():
    m = dyn.dqd_model(*RATES)
    times = [0.0, 0.5, 1.25, 3.0]
    traj = dyn.trajectory(m, LEFT, times, 1e-3)
    for t, state in zip(times, traj):
        assert np.allclose(state.matrix, dqd_state(*RATES, LEFT.matrix, t), atol=1e-11)
    with pytest.raises(ValueError):
        dyn.trajectory(m, LEFT, [1.0, 0.5])


def test_positivity_guard():
    # an identity jump leaves every state alone; a large step on a stiff decay overshoots
    trivial = dyn.LindbladModel(np.zeros((2, 2)), ((np.eye(2), 1.0),))
    stiff = dyn.LindbladModel(np.zeros((2, 2)), ((np.array([[0, 1], [0, 0]]), 200.0),))
    rho = DensityMatrix(np.diag([0.0, 1.0]))
    assert dyn.evolve(trivial, rho, 1.0).allclose(rho)
    with pytest.raises(dyn.DynamicsError):
        dyn.evolve(stiff, rho, 1.0, dt=0.05)


def test_temporal_scenario_shapes():
    m = dyn.dqd_model(*RATES)
    p_t, w = dyn.temporal_scenario(m, dyn.basis_initial_states(), 0.5, 1.5)
    assert p_t.shape == w.shape == (3, 3)
    assert np.allclose(p_t.sum(axis=1), 1)
    with pytest.raises(ValueError):
        dyn.temporal_scenario(m, dyn.basis_initial_states(), 2.0, 1.0)


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        dyn.SweepGrid((0.0, 0.05), (0.0, 0.05), dt=0.01)
    with pytest.raises(ValueError):
        dyn.SweepGrid((0.5, 0.1), (0.0,))
    g = dyn.SweepGrid.uniform(1.0, 1.0, 5, 1e-3)
    assert len(g.t0_values) == 5 and g.tau_values[-1] == 1.0


def test_small_sweep_properties():
    grid = dyn.SweepGrid.uniform(3.0, 3.0, 13, 1e-3)
    q = dyn.qt_sweep(dyn.dqd_model(*RATES), grid=grid)
    assert q.shape == (13, 13)
    assert np.all(q >= 0)
    assert np.allclose(q[:, 0], 0, atol=1e-9)  # tau = 0 is the identity map
    assert q.max() > 1e-3
    q0 = dyn.qt_sweep(dyn.dqd_model(4.0, 0.1, 0.0), grid=grid)
    assert np.max(np.abs(q0)) < 1e-6


def test_sweep_parallel_bit_identical():
    grid = dyn.SweepGrid.uniform(2.0, 2.0, 9, 1e-3)
    m = dyn.dqd_model(*RATES)
    a = dyn.qt_sweep(m, grid=grid, n_jobs=1)
    b = dyn.qt_sweep(m, grid=grid, n_jobs=2)
    assert np.array_equal(a, b)
