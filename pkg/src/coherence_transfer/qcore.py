"""Dense density-matrix primitives.

Basis convention: |H> = (1, 0), |V> = (0, 1); a multi-qubit basis index is
``sum(bit_j * 2 ** (n - 1 - j))`` so qubit 0 is the most significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
POSITIVITY_FLOOR = -1e-9
TRACE_TOL = 1e-9
NORM_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class DimensionMismatch(ValueError):
    pass


class InvalidState(ValueError):
    pass


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidState("matrix has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD matrix; ``subnormalized`` marks post-selected states
    whose trace is a success probability rather than 1."""

    matrix: np.ndarray
    subnormalized: bool = False

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > HERMITIAN_TOL:
            raise InvalidState(f"not Hermitian (max |A - A^dag| = {herm:.3e})")
        tr = float(np.real(np.trace(m)))
        if self.subnormalized:
            if not (0.0 < tr <= 1.0 + TRACE_TOL):
                raise InvalidState(f"subnormalized trace {tr!r} outside (0, 1]")
        elif abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace {tr!r} differs from 1")
        lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lam_min < POSITIVITY_FLOOR:
            raise InvalidState(f"negative eigenvalue {lam_min:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0.0:
            raise InvalidState("cannot normalize a zero-trace state")
        return DensityMatrix(self.matrix / tr)

    def allclose(self, other, atol: float = 1e-10) -> bool:
        other = other.matrix if isinstance(other, DensityMatrix) else np.asarray(other)
        return other.shape == self.matrix.shape and np.allclose(self.matrix, other, atol=atol, rtol=0)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise InvalidState("amplitudes have non-finite entries")
        object.__setattr__(self, "amplitudes", v)
        if self.normalized and abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
            raise InvalidState(f"squared norm {np.vdot(v, v).real!r} differs from 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        rho = np.outer(v, v.conj())
        if self.normalized:
            return DensityMatrix(rho)
        return DensityMatrix(rho, subnormalized=True)


def as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    m = _as_matrix(rho)
    tr = float(np.real(np.trace(m)))
    return DensityMatrix(m, subnormalized=abs(tr - 1.0) > TRACE_TOL)


def ket(bits: str) -> np.ndarray:
    """Computational basis vector from a string over {0,1} or {H,V}."""
    table = str.maketrans("HV", "01")
    bits = bits.translate(table)
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"bad basis label {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def kron(a, b) -> np.ndarray:
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_all(mats: Sequence) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, _as_matrix(m))
    return out


def embed(op, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Lift an operator acting on ``targets`` (in the given order) to the full
    ``n_qubits`` register.  Rectangular operators are allowed as long as the
    row and column spaces both factor into qubits."""
    op = _as_matrix(op)
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n_qubits for t in targets):
        raise DimensionMismatch(f"bad target qubits {targets} for {n_qubits} qubits")
    k_in = int(round(np.log2(op.shape[1])))
    k_out = int(round(np.log2(op.shape[0])))
    if 2**k_in != op.shape[1] or 2**k_out != op.shape[0] or k_in != len(targets) or k_out != k_in:
        raise DimensionMismatch(f"operator of shape {op.shape} does not act on {len(targets)} qubits")
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # full acts on ordering targets + rest; permute back to natural ordering.
    order = targets + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(list(perm) + [n_qubits + p for p in perm])
    return t.reshape(2**n_qubits, 2**n_qubits)


def apply_operator(m, rho) -> DensityMatrix:
    """Return ``M rho M^dag`` without renormalizing.

    The trace of the result is the probability of the (post-selected) event
    described by ``M``.
    """
    m = _as_matrix(m)
    rho = as_density(rho)
    if m.shape[1] != rho.dim:
        raise DimensionMismatch(f"operator {m.shape} incompatible with state of dim {rho.dim}")
    out = m @ rho.matrix @ m.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, subnormalized=True)


def partial_trace(rho, subsystem_dims: Sequence[int], keep: Sequence[int]) -> DensityMatrix:
    rho = as_density(rho)
    dims = [int(d) for d in subsystem_dims]
    keep = sorted(set(int(k) for k in keep))
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatch(f"subsystem dims {dims} do not multiply to {rho.dim}")
    if not keep or any(not 0 <= k < len(dims) for k in keep):
        raise DimensionMismatch(f"bad keep set {keep} for {len(dims)} subsystems")
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum labels: rows a.., cols b..; traced subsystems share a label.
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for i in traced:
        cols[i] = rows[i]
    out_labels = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out_labels, t)
    d_keep = int(np.prod([dims[i] for i in keep]))
    reduced = reduced.reshape(d_keep, d_keep)
    return DensityMatrix(reduced, subnormalized=rho.subnormalized)


def dephase(rho) -> DensityMatrix:
    rho = as_density(rho)
    return DensityMatrix(np.diag(np.diag(rho.matrix)), subnormalized=rho.subnormalized)


def populations(rho) -> np.ndarray:
    rho = as_density(rho)
    tr = rho.trace
    if tr <= 0.0:
        raise InvalidState("populations of a zero-trace state are undefined")
    p = np.real(np.diag(rho.matrix)) / tr
    p = np.where(p < 0.0, 0.0, p)
    return p / p.sum()


def fidelity_pure(rho, psi) -> float:
    rho = as_density(rho)
    v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex).reshape(-1)
    if v.shape[0] != rho.dim:
        raise DimensionMismatch(f"state of dim {v.shape[0]} vs density matrix of dim {rho.dim}")
    f = np.vdot(v, rho.matrix @ v)
    return float(np.clip(f.real, 0.0, 1.0))


def expectation(rho, obs) -> float:
    rho = as_density(rho)
    obs = _as_matrix(obs)
    if obs.shape != (rho.dim, rho.dim):
        raise DimensionMismatch(f"observable {obs.shape} vs state of dim {rho.dim}")
    if np.max(np.abs(obs - obs.conj().T)) > HERMITIAN_TOL:
        raise ValueError("observable is not Hermitian")
    return float(np.real(np.trace(rho.matrix @ obs)))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random state from a Ginibre draw, handy for property tests."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
