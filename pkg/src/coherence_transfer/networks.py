"""End-to-end photonic network scenarios and the triangular network.

Photon ``p`` (1-based, as in the experiment's mode numbering) lives on qubit
``p - 1``.  Pair ``j`` (1-based) occupies photons ``2j - 1`` and ``2j`` and is
prepared in the white-noise model of :func:`optics.noisy_pair`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import optics
from .optics import BellLabel, BsmConfig, WaveplateSetting
from .qcore import (
    DensityMatrix,
    PureState,
    apply_operator,
    as_density,
    embed,
    kron,
    kron_all,
    partial_trace,
    populations,
)


class NetworkSize(int, Enum):
    N4 = 4
    N6 = 6


class Variant(str, Enum):
    CAPABLE = "capable"
    CONTROL = "control"


# Input ordering rho_in,1..4 of the two-qubit experiments.
TWO_QUBIT_INPUTS = (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS, BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)
# Polarizer pair (degrees) applied to the output photons in the control runs;
# each product state is a component of the matching Bell state.
CONTROL_POLARIZERS = {
    BellLabel.PSI_PLUS: (90.0, 0.0),
    BellLabel.PSI_MINUS: (0.0, 90.0),
    BellLabel.PHI_PLUS: (0.0, 0.0),
    BellLabel.PHI_MINUS: (90.0, 90.0),
}

_X_BASIS = {"+": np.array([1, 1]) / np.sqrt(2), "-": np.array([1, -1]) / np.sqrt(2)}


@dataclass(frozen=True, eq=False)
class ScenarioData:
    """Population tables of one experiment.

    ``diag_populations[k]`` holds the Z-basis populations of output state
    ``k`` (setting 1); ``checkpoint_populations[k]`` the populations after
    the checkpoint operation (setting 2).
    """

    diag_populations: np.ndarray
    checkpoint_populations: np.ndarray
    metadata: str = ""
    output_states: tuple = field(default=(), repr=False)

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.diag_populations, dtype=float))
        p = np.atleast_2d(np.asarray(self.checkpoint_populations, dtype=float))
        if w.shape != p.shape:
            raise ValueError(f"population tables disagree in shape: {w.shape} vs {p.shape}")
        n, d = w.shape
        if n < 1 or d < 2:
            raise ValueError(f"need n >= 1 settings and d >= 2 outcomes, got n={n}, d={d}")
        for name, table in (("diag_populations", w), ("checkpoint_populations", p)):
            if np.any(~np.isfinite(table)) or np.any(table < -1e-12):
                raise ValueError(f"{name} has negative or non-finite entries")
            if np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
                raise ValueError(f"{name} rows must sum to 1")
        object.__setattr__(self, "diag_populations", np.clip(w, 0.0, None))
        object.__setattr__(self, "checkpoint_populations", np.clip(p, 0.0, None))

    @property
    def n(self) -> int:
        return self.diag_populations.shape[0]

    @property
    def d(self) -> int:
        return self.diag_populations.shape[1]

    @classmethod
    def from_states(cls, states: Sequence, checkpoint: np.ndarray, metadata: str = "") -> "ScenarioData":
        states = tuple(as_density(s).normalized() for s in states)
        diag = np.array([populations(s) for s in states])
        after = np.array([populations(apply_operator(checkpoint, s)) for s in states])
        return cls(diag, after, metadata=metadata, output_states=states)


def _check_setting(name: str, value: int) -> int:
    if value not in (1, 2, 3):
        raise ValueError(f"{name} must be 1, 2 or 3, got {value!r}")
    return value


def _pairs_state(visibilities: Sequence[float], n_pairs: int) -> DensityMatrix:
    v = list(visibilities)
    if len(v) != n_pairs:
        raise ValueError(f"expected {n_pairs} pair visibilities, got {len(v)}")
    return DensityMatrix(kron_all([optics.noisy_pair(x).matrix for x in v]))


def fusion_unit(phase: float = np.pi) -> np.ndarray:
    """PBS fusion with the unit's relative-phase plate.

    The plate imprints ``exp(i phase)`` on the VV amplitude; the default of pi
    makes the ``++`` X-outcome hand the input qubit on as ``X rho X``.
    """
    return np.diag([1, 0, 0, np.exp(1j * phase)]) @ optics.fusion_operator()


def _project(rho: DensityMatrix, qubit: int, vec: np.ndarray, n: int) -> DensityMatrix:
    proj = np.outer(vec, np.conj(vec))
    return apply_operator(embed(proj, [qubit], n), rho)


def _fuse(rho: DensityMatrix, a: int, b: int, branch: str, n: int, phase: float) -> DensityMatrix:
    if len(branch) != 2 or set(branch) - {"+", "-"}:
        raise ValueError(f"X-outcome branch must be two of '+'/'-', got {branch!r}")
    out = apply_operator(embed(fusion_unit(phase), [a, b], n), rho)
    out = _project(out, a, _X_BASIS[branch[0]], n)
    return _project(out, b, _X_BASIS[branch[1]], n)


def branch_parity(branch: str) -> int:
    """0 when both X outcomes agree, 1 otherwise."""
    return int(branch[0] != branch[1])


def fusion_transfer(rho1, branch: str = "++", visibility: float = 1.0, phase: float = np.pi) -> DensityMatrix:
    """Fuse a single-photon state with one half of a fresh pair and return the
    normalized state of the pair's other photon."""
    rho1 = as_density(rho1)
    state = DensityMatrix(kron(rho1.matrix, optics.noisy_pair(visibility).matrix))
    out = _fuse(state, 0, 1, branch, 3, phase)
    return partial_trace(out, [2, 2, 2], [2]).normalized()


def one_qubit_transfer_closed_form(rho1, parity: int) -> np.ndarray:
    r = as_density(rho1).matrix
    s = (-1) ** parity
    return np.array([[r[1, 1], s * r[1, 0]], [s * r[0, 1], r[0, 0]]])


def one_qubit_outputs(
    network_size,
    rsp_setting: int,
    pair_visibilities: Sequence[float] | None = None,
    branches: Sequence[str] | None = None,
    phase: float = np.pi,
) -> tuple[list[DensityMatrix], list[float]]:
    """Output states rho_out,k (k = 0, 1) of remote state preparation followed
    by one (N4) or two (N6) fusion units.

    ``rho_in,k = U|k><k|U^dag`` where the RSP waveplates implement ``U^dag``;
    Alice's Z outcome ``1 - k`` heralds it.  Returns the normalized outputs
    and their heralding probabilities.
    """
    size = NetworkSize(network_size)
    _check_setting("rsp_setting", rsp_setting)
    n_pairs = 2 if size is NetworkSize.N4 else 3
    vis = [1.0] * n_pairs if pair_visibilities is None else list(pair_visibilities)
    n_fusions = n_pairs - 1
    branches = ["++"] * n_fusions if branches is None else list(branches)
    if len(branches) != n_fusions:
        raise ValueError(f"expected {n_fusions} fusion branches, got {len(branches)}")

    n = 2 * n_pairs
    rsp = optics.checkpoint_unitary(WaveplateSetting.standard(rsp_setting))
    if size is NetworkSize.N4:
        alice, fusions, output = 1, [(0, 2)], 3
    else:
        # photon 6 is Alice's; fuse (5, 2), then (1, 3); photon 4 is the output
        alice, fusions, output = 5, [(4, 1), (0, 2)], 3

    base = _pairs_state(vis, n_pairs)
    base = apply_operator(embed(rsp, [alice], n), base)
    outs, probs = [], []
    for k in (0, 1):
        rho = _project(base, alice, np.eye(2)[1 - k], n)
        for (a, b), br in zip(fusions, branches):
            rho = _fuse(rho, a, b, br, n, phase)
        probs.append(rho.trace)
        outs.append(partial_trace(rho, [2] * n, [output]).normalized())
    return outs, probs


def run_one_qubit(
    network_size,
    rsp_setting: int,
    checkpoint_setting: int,
    pair_visibilities: Sequence[float] | None = None,
    branches: Sequence[str] | None = None,
) -> ScenarioData:
    _check_setting("checkpoint_setting", checkpoint_setting)
    outs, _ = one_qubit_outputs(network_size, rsp_setting, pair_visibilities, branches)
    v = optics.checkpoint_unitary(WaveplateSetting.standard(checkpoint_setting))
    size = NetworkSize(network_size).value
    meta = f"one-qubit N{size} rsp={rsp_setting} checkpoint={checkpoint_setting}"
    return ScenarioData.from_states(outs, v, metadata=meta)


def _bsm(rho: DensityMatrix, a: int, b: int, config: BsmConfig, n: int) -> DensityMatrix:
    """Coarse-grained BSM outcome on photons (a, b); the detected photons are
    left in their click states and must be traced out by the caller."""
    total = None
    for pattern in config.detection_patterns:
        row = optics.bsm_kraus(config, pattern)
        z_bits = pattern.replace("+", "0").replace("-", "1")
        full = np.outer(np.eye(4)[int(z_bits, 2)], row.reshape(-1))
        term = apply_operator(embed(full, [a, b], n), rho).matrix
        total = term if total is None else total + term
    return DensityMatrix(total, subnormalized=True)


def _swap_qubits(rho: DensityMatrix) -> DensityMatrix:
    swap = np.eye(4)[[0, 2, 1, 3]]
    return DensityMatrix(swap @ rho.matrix @ swap.T, subnormalized=rho.subnormalized)


def two_qubit_outputs(
    network_size,
    variant=Variant.CAPABLE,
    pair_visibilities: Sequence[float] | None = None,
) -> tuple[list[DensityMatrix], list[float]]:
    """Output two-photon states for the inputs psi+, psi-, phi+, phi- (in that
    order) via entanglement swapping.

    N4: BSM on photons (1, 3), output (2, 4).  N6: input BSM on (5, 2),
    transfer BSM projecting (1, 3) onto psi-, output (6, 4).
    """
    size = NetworkSize(network_size)
    variant = Variant(variant)
    n_pairs = 2 if size is NetworkSize.N4 else 3
    vis = [1.0] * n_pairs if pair_visibilities is None else list(pair_visibilities)
    n = 2 * n_pairs
    base = _pairs_state(vis, n_pairs)
    outs, probs = [], []
    for label in TWO_QUBIT_INPUTS:
        cfg = BsmConfig.for_label(label)
        if size is NetworkSize.N4:
            rho = _bsm(base, 0, 2, cfg, n)
            first, second = 1, 3
        else:
            rho = _bsm(base, 4, 1, cfg, n)
            rho = _bsm(rho, 0, 2, BsmConfig.for_label(BellLabel.PSI_MINUS), n)
            first, second = 5, 3
        if variant is Variant.CONTROL:
            t1, t2 = CONTROL_POLARIZERS[label]
            rho = apply_operator(embed(optics.polarizer(t1), [first], n), rho)
            rho = apply_operator(embed(optics.polarizer(t2), [second], n), rho)
        probs.append(rho.trace)
        out = partial_trace(rho, [2] * n, [first, second])
        if first > second:
            out = _swap_qubits(out)
        outs.append(out.normalized())
    return outs, probs


def run_two_qubit(
    network_size,
    variant,
    checkpoint_setting: int,
    pair_visibilities: Sequence[float] | None = None,
) -> ScenarioData:
    _check_setting("checkpoint_setting", checkpoint_setting)
    outs, _ = two_qubit_outputs(network_size, variant, pair_visibilities)
    v = optics.checkpoint_unitary(WaveplateSetting.standard(checkpoint_setting))
    meta = (
        f"two-qubit N{NetworkSize(network_size).value} {Variant(variant).value} "
        f"checkpoint={checkpoint_setting}"
    )
    return ScenarioData.from_states(outs, kron(v, v), metadata=meta)


def ghz_backbone(n_pairs: int = 3, phase: float = np.pi) -> PureState:
    """Pure state left after fusing ideal pairs with fusion unit 1 on photons
    (1, 3) and, for three pairs, unit 2 on photons (2, 5)."""
    if n_pairs not in (2, 3):
        raise ValueError("n_pairs must be 2 or 3")
    psi = optics.bell_state(BellLabel.PSI_MINUS).amplitudes
    v = psi
    for _ in range(n_pairs - 1):
        v = np.kron(v, psi)
    n = 2 * n_pairs
    v = embed(fusion_unit(phase), [0, 2], n) @ v
    if n_pairs == 3:
        v = embed(fusion_unit(phase), [1, 4], n) @ v
    return PureState(v / np.linalg.norm(v))


# --- triangular network -------------------------------------------------

TRIANGLE_OUTCOMES = tuple(itertools.product((0, 1), repeat=3))


@dataclass(frozen=True)
class TriangularClassicalModel:
    """Clockwise/counterclockwise mixture; ``p[X]`` and ``q[X]`` are the
    probabilities that party X outputs 1 in each configuration."""

    gamma: float
    p: tuple[float, float, float]
    q: tuple[float, float, float]

    def __post_init__(self):
        vals = [self.gamma, *self.p, *self.q]
        if len(self.p) != 3 or len(self.q) != 3:
            raise ValueError("p and q need one entry per party")
        if any(not 0.0 <= float(x) <= 1.0 for x in vals):
            raise ValueError("all classical-model parameters must lie in [0, 1]")

    @classmethod
    def from_vector(cls, x) -> "TriangularClassicalModel":
        x = [float(v) for v in x]
        return cls(x[0], tuple(x[1:4]), tuple(x[4:7]))


def triangle_classical_distribution(model: TriangularClassicalModel) -> np.ndarray:
    def bern(prob, outcome):
        return prob if outcome else 1.0 - prob

    out = np.empty(8)
    for idx, (a, b, c) in enumerate(TRIANGLE_OUTCOMES):
        cw = bern(model.p[0], a) * bern(model.p[1], b) * bern(model.p[2], c)
        ccw = bern(model.q[0], a) * bern(model.q[1], b) * bern(model.q[2], c)
        out[idx] = model.gamma * cw + (1.0 - model.gamma) * ccw
    return out


# Each source's two path modes, as (source, station).  Station inputs are
# (port 1, port 2); the beam splitter sends port j to (1/sqrt2)[[1, 1], [1, -1]].
_SOURCE_PATHS = {1: ("A", "B"), 2: ("B", "C"), 3: ("C", "A")}
_STATION_PORTS = {"A": (1, 3), "B": (1, 2), "C": (2, 3)}
_BS = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def simulate_triangle_distribution() -> np.ndarray:
    """Post-selected outcome distribution from the path-superposition state.

    Expands the product of creation operators mode by mode and keeps terms with
    one particle per station; returns probabilities indexed as
    :data:`TRIANGLE_OUTCOMES`.
    """
    terms: dict[tuple, complex] = {(): 1.0 + 0j}
    for src, stations in _SOURCE_PATHS.items():
        new: dict[tuple, complex] = {}
        for station in stations:
            port = _STATION_PORTS[station].index(src)
            for det in (0, 1):
                amp = _BS[det, port] / np.sqrt(2)
                for key, val in terms.items():
                    k2 = tuple(sorted(key + ((station, det),)))
                    new[k2] = new.get(k2, 0.0) + val * amp
        terms = new

    dist = np.zeros(8)
    for key, amp in terms.items():
        stations = [s for s, _ in key]
        if sorted(stations) != ["A", "B", "C"]:
            continue
        outcome = tuple(det for _, det in sorted(key))
        dist[TRIANGLE_OUTCOMES.index(outcome)] += abs(amp) ** 2
    return dist / dist.sum()


def triangle_quantum_distribution(check: bool = True) -> np.ndarray:
    """Even-parity distribution with 1/4 on 000, 011, 101, 110.

    With ``check`` the hard-coded table is compared against
    :func:`simulate_triangle_distribution`.
    """
    target = np.array([0.25 if (a + b + c) % 2 == 0 else 0.0 for a, b, c in TRIANGLE_OUTCOMES])
    if check:
        sim = simulate_triangle_distribution()
        if np.max(np.abs(sim - target)) > 1e-12:
            raise RuntimeError(f"simulated triangle distribution {sim} disagrees with {target}")
    return target
