import numpy as np
import pytest

from coherence_transfer import qcore as qc
from coherence_transfer.optics import bell_state, ghz_state, G6_PATTERN, noisy_pair, qwp


def test_kron_xx_flips_hh_to_vv():
    out = qc.kron(qc.X, qc.X) @ qc.ket("HH")
    assert np.allclose(out, qc.ket("VV"))


def test_ket_accepts_both_alphabets():
    assert np.array_equal(qc.ket("HV"), qc.ket("01"))
    with pytest.raises(ValueError):
        qc.ket("HX")


def test_density_validation():
    with pytest.raises(qc.InvalidState):
        qc.DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(qc.InvalidState):
        qc.DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(qc.DimensionMismatch):
        qc.DensityMatrix(np.ones((2, 3)) / 3)
    sub = qc.DensityMatrix(np.diag([0.2, 0.1]), subnormalized=True)
    assert sub.trace == pytest.approx(0.3)


def test_embed_matches_explicit_kron():
    rng = np.random.default_rng(1)
    op = qc.random_unitary(4, rng)
    # targets (0, 1) of three qubits is op kron I
    assert np.allclose(qc.embed(op, [0, 1], 3), np.kron(op, np.eye(2)))
    # reversed targets equal swap-conjugated op
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(qc.embed(op, [1, 0], 2), swap @ op @ swap)


def test_partial_trace_of_product():
    rng = np.random.default_rng(2)
    a = qc.random_density(2, rng)
    b = qc.random_density(4, rng)
    rho = qc.DensityMatrix(np.kron(a.matrix, b.matrix))
    assert np.allclose(qc.partial_trace(rho, [2, 4], [0]).matrix, a.matrix)
    assert np.allclose(qc.partial_trace(rho, [2, 4], [1]).matrix, b.matrix)


def test_dephase_singlet():
    rho = bell_state("psi-").density()
    assert np.allclose(qc.dephase(rho).matrix, np.diag([0, 0.5, 0.5, 0]))


def test_populations_after_qwp45_on_circular_states():
    for sign, expected in ((1, (1, 0)), (-1, (0, 1))):
        circ = np.array([1, sign * 1j]) / np.sqrt(2)
        out = qwp(45) @ circ
        assert np.allclose(qc.populations(np.outer(out, out.conj())), expected, atol=1e-12)


def test_fidelity_of_werner_pair():
    assert qc.fidelity_pure(noisy_pair(0.9), bell_state("psi-")) == pytest.approx(0.925, abs=1e-12)


def test_ghz6_x_stabilizer():
    g6 = ghz_state(6, G6_PATTERN).density()
    assert qc.expectation(g6, qc.kron_all([qc.X] * 6)) == pytest.approx(1.0, abs=1e-12)


def test_expectation_rejects_non_hermitian():
    with pytest.raises(ValueError):
        qc.expectation(np.eye(2) / 2, np.array([[0, 1], [0, 0]]))


def test_apply_operator_fusion_probability():
    # PBS fusion of photons 1 and 3 of two singlets passes half the weight
    from coherence_transfer.optics import fusion_operator
    psi = bell_state("psi-").density().matrix
    rho = qc.DensityMatrix(np.kron(psi, psi))
    out = qc.apply_operator(qc.embed(fusion_operator(), [0, 2], 4), rho)
    assert out.trace == pytest.approx(0.5, abs=1e-12)


def test_populations_zero_trace_raises():
    with pytest.raises(qc.InvalidState):
        qc.populations(qc.DensityMatrix(np.zeros((2, 2)), subnormalized=True))
