import json

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from coherence_transfer import capability as cap
from coherence_transfer import dynamics as dyn
from coherence_transfer import networks as nw
from coherence_transfer import runner
from coherence_transfer.qcore import DensityMatrix, dephase, partial_trace, populations

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def density(draw, dim):
    a = draw(arrays(np.float64, (dim, dim), elements=finite)) + 1j * draw(arrays(np.float64, (dim, dim), elements=finite))
    m = a @ a.conj().T + 1e-3 * np.eye(dim)
    return m / np.trace(m)


@st.composite
def distributions(draw, n, d):
    raw = draw(arrays(np.float64, (n, d), elements=st.floats(0.0, 1.0)))
    raw = raw + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


@st.composite
def kernel_tables(draw):
    n = draw(st.integers(1, 4))
    d = draw(st.integers(2, 4))
    return draw(distributions(n, d)), draw(distributions(n, d))


@settings(max_examples=50, deadline=None)
@given(kernel_tables())
def test_kernel_nonnegative_and_below_any_feasible_point(tables):
    w, p = tables
    res = cap.temporal_q(p, w)
    assert res.q_value >= 0.0
    t = cap.random_transfer_matrices(w.shape[1], 1, np.random.default_rng(0))[0]
    assert res.q_value <= cap.kernel_objective(w, p, t) + 1e-9
    assert res.q_value <= cap.kernel_objective(w, p, np.eye(w.shape[1])) + 1e-9


@settings(max_examples=50, deadline=None)
@given(kernel_tables(), st.randoms(use_true_random=False))
def test_kernel_invariant_under_setting_order(tables, rnd):
    w, p = tables
    order = list(range(w.shape[0]))
    rnd.shuffle(order)
    a = cap.temporal_q(p, w).q_value
    b = cap.temporal_q(p[order], w[order]).q_value
    assert abs(a - b) < 1e-9


@settings(max_examples=50, deadline=None)
@given(distributions(4, 3), st.integers(0, 2**32 - 1))
def test_incapable_data_gives_zero(w, seed):
    t = cap.random_transfer_matrices(3, 1, np.random.default_rng(seed))[0]
    assert cap.temporal_q(w @ t.T, w).q_value < 1e-8


@settings(max_examples=50, deadline=None)
@given(distributions(1, 3), distributions(1, 3))
def test_single_setting_zero(w, p):
    assert cap.temporal_q(p, w).q_value < 1e-9


@settings(max_examples=50, deadline=None)
@given(density(2), st.sampled_from(["++", "--", "+-", "-+"]))
def test_relay_closed_form(rho, branch):
    out = nw.fusion_transfer(rho, branch).matrix
    assert np.allclose(out, nw.one_qubit_transfer_closed_form(rho, nw.branch_parity(branch)), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(density(2), density(2))
def test_partial_trace_recovers_factors(a, b):
    rho = DensityMatrix(np.kron(a, b))
    assert np.allclose(partial_trace(rho, [2, 2], [0]).matrix, a, atol=1e-12)
    assert np.allclose(partial_trace(rho, [2, 2], [1]).matrix, b, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(density(4))
def test_dephase_idempotent_and_population_preserving(rho):
    once = dephase(rho)
    assert np.allclose(dephase(once).matrix, once.matrix)
    assert np.allclose(populations(once), populations(rho))
    assert abs(populations(rho).sum() - 1) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5), st.floats(-2, 2), density(3), st.floats(0.1, 3.0))
def test_lindblad_flow_keeps_state_physical(gl, gr, delta, rho, t):
    m = dyn.dqd_model(gl, gr, delta)
    out = dyn.evolve(m, rho, t, dt=1e-2)
    assert abs(out.trace - 1) < 1e-8 * max(t, 1)
    assert np.linalg.eigvalsh(out.matrix).min() > -1e-7


# --- configs ----------------------------------------------------------------

vis = st.floats(0.0, 1.0, allow_nan=False)
seeds = st.integers(0, 2**64 - 1)


@st.composite
def configs(draw):
    scenario = draw(st.sampled_from(runner.SCENARIOS))
    raw = {"scenario": scenario, "seed": draw(seeds), "format": draw(st.sampled_from(runner.FORMATS))}
    if draw(st.booleans()):
        raw["out"] = draw(st.text("abcxyz_./", min_size=1, max_size=12))
    if scenario in ("one-qubit", "two-qubit"):
        net = draw(st.sampled_from([4, 6]))
        raw.update(network=net, checkpoint=draw(st.integers(1, 3)),
                   visibilities=draw(st.lists(vis, min_size=net // 2, max_size=net // 2)),
                   oracle_trials=draw(st.integers(0, 10**6)))
        if scenario == "one-qubit":
            raw["rsp"] = draw(st.integers(1, 3))
        else:
            raw["variant"] = draw(st.sampled_from(["capable", "control"]))
    elif scenario == "triangle":
        raw["restarts"] = draw(st.integers(0, 1000))
    elif scenario == "dqd":
        points = draw(st.integers(2, 200))
        t0_max = draw(st.floats(0.5, 10.0))
        tau_max = draw(st.floats(0.5, 10.0))
        step = min(t0_max, tau_max) / (points - 1)
        raw.update(gamma_l=draw(st.floats(0, 10)), gamma_r=draw(st.floats(0, 10)), delta=draw(st.floats(-5, 5)),
                   t0_max=t0_max, tau_max=tau_max, points=points, dt=draw(st.floats(1e-5, step / 10)))
    else:
        raw.update(cases=draw(st.integers(1, 1000)), max_vars=draw(st.integers(4, 12)))
    return raw


@settings(max_examples=100, deadline=None)
@given(configs())
def test_config_roundtrip(raw):
    cfg = runner.config_from_dict(raw)
    again = runner.parse_config(cfg.to_json())
    assert again == cfg
    assert json.loads(again.to_json()) == json.loads(cfg.to_json())


@settings(max_examples=50, deadline=None)
@given(configs(), st.text("abcdefghij", min_size=1, max_size=8))
def test_unknown_keys_rejected(raw, key):
    raw = dict(raw)
    raw["zz_" + key] = 1
    try:
        runner.config_from_dict(raw)
    except runner.ConfigError as exc:
        assert "zz_" + key in str(exc)
    else:
        raise AssertionError("unknown key accepted")
