"""Polarization optics: waveplates, polarizers, PBS fusion and Bell-state
measurement operators, entangled-state factories and witness formulas.

Jones conventions (angles in degrees, fast axis relative to horizontal)::

    HWP(t) = [[cos 2t,  sin 2t],
              [sin 2t, -cos 2t]]
    QWP(t) = exp(-i pi/4) [[cos^2 t + i sin^2 t, (1 - i) sin t cos t],
                           [(1 - i) sin t cos t, sin^2 t + i cos^2 t]]

Analyzer setting ``(qwp, hwp)`` acts as ``QWP @ HWP`` (light meets the HWP
first).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qcore import DensityMatrix, PureState, X, Z, ket, kron_all

# (qwp, hwp) angles of the three RSP / checkpoint settings.
STANDARD_SETTINGS = {1: (45.0, 0.0), 2: (30.0, 0.0), 3: (0.0, 0.0)}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def hwp(theta: float) -> np.ndarray:
    t = np.deg2rad(2.0 * float(theta))
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


def qwp(theta: float) -> np.ndarray:
    t = np.deg2rad(float(theta))
    c, s = np.cos(t), np.sin(t)
    m = np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]],
        dtype=complex,
    )
    return np.exp(-1j * np.pi / 4) * m


@dataclass(frozen=True)
class WaveplateSetting:
    qwp_angle: float
    hwp_angle: float = 0.0

    def __post_init__(self):
        for name in ("qwp_angle", "hwp_angle"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v % 180.0)

    @classmethod
    def standard(cls, index: int) -> "WaveplateSetting":
        """Setting 1, 2 or 3: QWP at 45, 30 or 0 degrees, HWP at 0."""
        if index not in STANDARD_SETTINGS:
            raise ValueError(f"setting index must be 1, 2 or 3, got {index!r}")
        return cls(*STANDARD_SETTINGS[index])


def checkpoint_unitary(setting: WaveplateSetting) -> np.ndarray:
    return qwp(setting.qwp_angle) @ hwp(setting.hwp_angle)


def polarizer(theta: float) -> np.ndarray:
    t = np.deg2rad(float(theta))
    v = np.array([np.cos(t), np.sin(t)], dtype=complex)
    return np.outer(v, v.conj())


class BellLabel(str, Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


_BELL_AMPS = {
    BellLabel.PHI_PLUS: ("00", "11", 1),
    BellLabel.PHI_MINUS: ("00", "11", -1),
    BellLabel.PSI_PLUS: ("01", "10", 1),
    BellLabel.PSI_MINUS: ("01", "10", -1),
}


def bell_state(label) -> PureState:
    a, b, sign = _BELL_AMPS[BellLabel(label)]
    return PureState((ket(a) + sign * ket(b)) / np.sqrt(2))


def ghz_state(n_qubits: int, patterns: tuple[str, str]) -> PureState:
    """Equal superposition of two complementary basis patterns, e.g.
    ``ghz_state(4, ("HVHV", "VHVH"))``."""
    if not 2 <= n_qubits <= 6:
        raise ValueError(f"n_qubits must be in [2, 6], got {n_qubits}")
    first, second = (p.upper().translate(str.maketrans("HV", "01")) for p in patterns)
    if len(first) != n_qubits or len(second) != n_qubits:
        raise ValueError("pattern length must equal n_qubits")
    if any(x == y for x, y in zip(first, second)):
        raise ValueError(f"patterns {patterns} are not bitwise complements")
    return PureState((ket(first) + ket(second)) / np.sqrt(2))


G4_PATTERN = ("HVHV", "VHVH")
G6_PATTERN = ("HVHVVH", "VHVHHV")


def noisy_pair(visibility: float) -> DensityMatrix:
    """White-noise (Werner) mixture ``v |psi-><psi-| + (1 - v) I/4``."""
    v = float(visibility)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    psi = bell_state(BellLabel.PSI_MINUS).amplitudes
    return DensityMatrix(v * np.outer(psi, psi.conj()) + (1.0 - v) * np.eye(4) / 4)


def visibility_for_fidelity(fidelity: float) -> float:
    """Invert ``F = v + (1 - v)/4``."""
    return (4.0 * fidelity - 1.0) / 3.0


def fusion_operator() -> np.ndarray:
    """PBS fusion ``|HH><HH| + |VV><VV|`` on the two input photons."""
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 1.0
    return m


class BsmFamily(str, Enum):
    PHI = "phi"
    PSI = "psi"


class BsmOutcome(str, Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class BsmConfig:
    family: BsmFamily
    outcome: BsmOutcome

    def __post_init__(self):
        object.__setattr__(self, "family", BsmFamily(self.family))
        object.__setattr__(self, "outcome", BsmOutcome(self.outcome))

    @property
    def label(self) -> BellLabel:
        if self.family is BsmFamily.PHI:
            return BellLabel.PHI_PLUS if self.outcome is BsmOutcome.PLUS else BellLabel.PHI_MINUS
        return BellLabel.PSI_PLUS if self.outcome is BsmOutcome.PLUS else BellLabel.PSI_MINUS

    @classmethod
    def for_label(cls, label) -> "BsmConfig":
        label = BellLabel(label)
        family = BsmFamily.PHI if label in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS) else BsmFamily.PSI
        outcome = BsmOutcome.PLUS if label in (BellLabel.PHI_PLUS, BellLabel.PSI_PLUS) else BsmOutcome.MINUS
        return cls(family, outcome)

    @property
    def detection_patterns(self) -> tuple[str, str]:
        # diagonal-basis click patterns on the two PBS outputs
        return ("++", "--") if self.outcome is BsmOutcome.PLUS else ("+-", "-+")


def pbs_operator(family) -> np.ndarray:
    """PBS map from input modes (a, b) to output modes (c, d), including the
    local ``I x sigma_X`` plates for the psi family."""
    m = fusion_operator()
    if BsmFamily(family) is BsmFamily.PSI:
        flip = np.kron(np.eye(2), X)
        m = flip @ m @ flip
    return m


def bsm_kraus(config: BsmConfig, pattern: str) -> np.ndarray:
    """1x4 row ``<pattern| (H x H) PBS`` for one diagonal-basis click pattern.

    The X-basis readout is a HWP at 22.5 degrees (the Hadamard in this Jones
    convention) in front of H/V detectors.
    """
    if len(pattern) != 2 or set(pattern) - {"+", "-"}:
        raise ValueError(f"bad detection pattern {pattern!r}")
    z_bits = pattern.replace("+", "0").replace("-", "1")
    readout = np.kron(hwp(22.5), hwp(22.5))
    return (ket(z_bits).conj() @ readout @ pbs_operator(config.family)).reshape(1, 4)


def bsm_operator(config: BsmConfig) -> np.ndarray:
    """Effective measurement operator of a coarse-grained BSM outcome.

    Summing ``K^dag K`` over both click patterns that signal the outcome gives
    the rank-1 projector onto the corresponding Bell state.
    """
    return sum(k.conj().T @ k for k in (bsm_kraus(config, p) for p in config.detection_patterns))


def pair_fidelity_from_correlations(xx: float, yy: float, zz: float) -> float:
    """Fidelity with |psi-> from the three two-photon Pauli correlators."""
    for name, v in (("xx", xx), ("yy", yy), ("zz", zz)):
        if not -1.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [-1, 1], got {v!r}")
    return (1.0 - xx - yy - zz) / 4.0


def _pattern_index(bits: str) -> int:
    return int(bits.upper().translate(str.maketrans("HV", "01")), 2)


def ghz6_witness(x_expect: float, z_populations, pattern: tuple[str, str] = G6_PATTERN) -> float:
    """Stabilizer witness ``3 - 2[(S1 + 1)/2 + Pi]`` for a six-photon GHZ state.

    ``Pi`` (the product of the ZZ-stabilizer projectors) is evaluated from the
    Z-basis population vector as the weight on the two GHZ patterns.  Negative
    values signal genuine six-partite entanglement.
    """
    p = np.asarray(z_populations, dtype=float).reshape(-1)
    if p.shape != (64,):
        raise ValueError(f"expected 64 Z-basis populations, got {p.shape}")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("z_populations is not a probability distribution")
    p_ghz = p[_pattern_index(pattern[0])] + p[_pattern_index(pattern[1])]
    return 3.0 - 2.0 * ((x_expect + 1.0) / 2.0 + p_ghz)


def ghz6_witness_from_correlators(x_expect: float, z_expect: float) -> float:
    """Two-correlator variant ``3 - 2[(<X^6> + 1)/2 + (<Z^6> + 1)/2]``.

    This is not equivalent to :func:`ghz6_witness`: the stabilizer product is
    not a function of ``<Z^6>`` alone.
    """
    return 3.0 - 2.0 * ((x_expect + 1.0) / 2.0 + (z_expect + 1.0) / 2.0)


def ghz6_witness_operator(pattern: tuple[str, str] = G6_PATTERN) -> np.ndarray:
    """Full 64x64 witness with stabilizers adapted to ``pattern``."""
    bits = pattern[0].upper().translate(str.maketrans("HV", "01"))
    n = len(bits)
    eye = np.eye(2**n, dtype=complex)
    s1 = kron_all([X] * n)
    proj = eye.copy()
    for k in range(1, n):
        sign = 1 if bits[k - 1] == bits[k] else -1
        ops = [np.eye(2)] * n
        ops[k - 1] = Z
        ops[k] = Z
        proj = proj @ (sign * kron_all(ops) + eye) / 2
    return 3 * eye - 2 * ((s1 + eye) / 2 + proj)
