"""Lindblad dynamics of single-electron transport through a double quantum
dot and the (t0, tau) sweep of the temporal kernel.

Basis: |0> (empty) = 0, |L> = 1, |R> = 2.  Time is in units of 1/Delta.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .capability import temporal_q
from .optimizer import LPStatus
from .qcore import DensityMatrix, as_density, populations

EMPTY, LEFT, RIGHT = 0, 1, 2
TRACE_DRIFT_PER_TIME = 1e-8
POSITIVITY_FLOOR = -1e-7


class DynamicsError(RuntimeError):
    pass


def _basis_op(i: int, j: int, dim: int = 3) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    op[i, j] = 1.0
    return op


@dataclass(frozen=True, eq=False)
class LindbladModel:
    hamiltonian: np.ndarray
    jumps: tuple = field(default=())  # (operator, rate) pairs

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("Hamiltonian must be Hermitian")
        jumps = []
        for op, rate in self.jumps:
            op = np.asarray(op, dtype=complex)
            if op.shape != h.shape:
                raise ValueError(f"jump operator shape {op.shape} does not match Hamiltonian {h.shape}")
            if rate < 0:
                raise ValueError(f"negative rate {rate!r}")
            jumps.append((op, float(rate)))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def superoperator(self) -> np.ndarray:
        """Generator acting on row-major ``vec(rho)``."""
        d = self.dim
        eye = np.eye(d)
        h = self.hamiltonian
        gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for j, rate in self.jumps:
            jdj = j.conj().T @ j
            gen += rate * (np.kron(j, j.conj()) - 0.5 * np.kron(jdj, eye) - 0.5 * np.kron(eye, jdj.T))
        return gen


def dqd_model(gamma_l: float, gamma_r: float, delta: float) -> LindbladModel:
    """Double dot with coherent tunnelling ``delta`` between L and R, loading
    |0> -> |L> at ``gamma_l`` and unloading |R> -> |0> at ``gamma_r``."""
    if gamma_l < 0 or gamma_r < 0:
        raise ValueError("tunnelling rates must be nonnegative")
    h = delta * (_basis_op(LEFT, RIGHT) + _basis_op(RIGHT, LEFT))
    # self-energy operators s_L = |0><L|, s_R = |R><0| enter as jumps s^dag
    s_l = _basis_op(EMPTY, LEFT)
    s_r = _basis_op(RIGHT, EMPTY)
    return LindbladModel(h, ((s_l.conj().T, gamma_l), (s_r.conj().T, gamma_r)))


def lindblad_derivative(model: LindbladModel, rho) -> np.ndarray:
    r = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    if r.shape != (model.dim, model.dim):
        raise ValueError(f"state of shape {r.shape} does not match model dimension {model.dim}")
    h = model.hamiltonian
    out = -1j * (h @ r - r @ h)
    for j, rate in model.jumps:
        jd = j.conj().T
        jdj = jd @ j
        out += rate * (j @ r @ jd - 0.5 * (jdj @ r + r @ jdj))
    return out


def _rk4_propagator(model: LindbladModel, h: float) -> np.ndarray:
    """One RK4 step as a matrix on vec(rho); the generator is linear so the
    four stages collapse to the degree-4 Taylor polynomial of ``h L``."""
    hl = h * model.superoperator()
    eye = np.eye(hl.shape[0])
    return eye + hl @ (eye + hl @ (eye / 2 + hl @ (eye / 6 + hl / 24)))


def _check(model, r: np.ndarray, t: float, tr0: float) -> None:
    drift = abs(np.trace(r).real - tr0)
    if drift > TRACE_DRIFT_PER_TIME * max(t, 1.0):
        raise DynamicsError(f"trace drift {drift:.3e} at t={t}")
    herm = np.max(np.abs(r - r.conj().T))
    if herm > 1e-10:
        raise DynamicsError(f"Hermiticity lost ({herm:.3e}) at t={t}")
    lam = np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0]
    if lam < POSITIVITY_FLOOR:
        raise DynamicsError(f"eigenvalue {lam:.3e} below floor at t={t}")


def _steps(t: float, dt: float) -> int:
    return max(1, int(np.ceil(t / dt - 1e-9)))


def evolve(model: LindbladModel, rho0, t: float, dt: float = 1e-3, stepwise: bool = False) -> DensityMatrix:
    """Fixed-step RK4 from 0 to ``t``; the step is shrunk to ``t / ceil(t / dt)``.

    ``stepwise=True`` evaluates the four stages explicitly with
    :func:`lindblad_derivative` instead of the collapsed propagator.
    """
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")
    rho0 = as_density(rho0)
    r = rho0.matrix.copy()
    if t == 0:
        return rho0
    n = _steps(t, dt)
    h = t / n
    if stepwise:
        for _ in range(n):
            k1 = lindblad_derivative(model, r)
            k2 = lindblad_derivative(model, r + 0.5 * h * k1)
            k3 = lindblad_derivative(model, r + 0.5 * h * k2)
            k4 = lindblad_derivative(model, r + h * k3)
            r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        prop = _rk4_propagator(model, h)
        v = r.reshape(-1)
        for _ in range(n):
            v = prop @ v
        r = v.reshape(model.dim, model.dim)
    _check(model, r, t, rho0.trace)
    r = 0.5 * (r + r.conj().T)
    return DensityMatrix(r, subnormalized=rho0.subnormalized)


def trajectory(model: LindbladModel, rho0, times: Sequence[float], dt: float = 1e-3) -> list[DensityMatrix]:
    """States at each of the ascending ``times``, integrating once."""
    rho0 = as_density(rho0)
    times = [float(x) for x in times]
    if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise ValueError("times must be ascending and nonnegative")
    v = rho0.matrix.reshape(-1).copy()
    now = 0.0
    out = []
    cache: dict[int, np.ndarray] = {}
    for target in times:
        span = target - now
        if span > 1e-12:
            n = _steps(span, dt)
            key = round(span / n * 1e12)
            if key not in cache:
                cache[key] = _rk4_propagator(model, span / n)
            prop = cache[key]
            for _ in range(n):
                v = prop @ v
            now = target
        r = v.reshape(model.dim, model.dim)
        _check(model, r, target, rho0.trace)
        out.append(DensityMatrix(0.5 * (r + r.conj().T), subnormalized=rho0.subnormalized))
    return out


def basis_initial_states(dim: int = 3) -> list[DensityMatrix]:
    out = []
    for i in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[i, i] = 1.0
        out.append(DensityMatrix(m))
    return out


def temporal_scenario(model: LindbladModel, initial_states, t0: float, t: float,
                      dt: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Population tables ``(populations_t, diag_t0)`` for the temporal kernel."""
    if not t >= t0 >= 0:
        raise ValueError("need t >= t0 >= 0")
    pops_t, diag_t0 = [], []
    for rho0 in initial_states:
        a, b = trajectory(model, rho0, [t0, t], dt)
        diag_t0.append(populations(a))
        pops_t.append(populations(b))
    return np.array(pops_t), np.array(diag_t0)


@dataclass(frozen=True)
class SweepGrid:
    t0_values: tuple
    tau_values: tuple
    dt: float = 1e-3

    def __post_init__(self):
        t0 = tuple(float(x) for x in self.t0_values)
        tau = tuple(float(x) for x in self.tau_values)
        if not t0 or not tau:
            raise ValueError("grid axes must be nonempty")
        for name, axis in (("t0_values", t0), ("tau_values", tau)):
            if any(b <= a for a, b in zip(axis, axis[1:])) or axis[0] < 0:
                raise ValueError(f"{name} must be strictly ascending and nonnegative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        spacing = min([b - a for ax in (t0, tau) for a, b in zip(ax, ax[1:])] or [np.inf])
        if self.dt > spacing / 10 + 1e-15:
            raise ValueError(f"dt={self.dt} exceeds a tenth of the grid spacing {spacing}")
        object.__setattr__(self, "t0_values", t0)
        object.__setattr__(self, "tau_values", tau)

    @classmethod
    def uniform(cls, t0_max: float = 6.0, tau_max: float = 6.0, points: int = 121, dt: float = 1e-3) -> "SweepGrid":
        return cls(tuple(np.linspace(0.0, t0_max, points)), tuple(np.linspace(0.0, tau_max, points)), dt)

    def times(self) -> list[float]:
        return sorted({_tkey(a + b) for a in self.t0_values for b in self.tau_values} |
                      {_tkey(a) for a in self.t0_values})


def _tkey(t: float) -> float:
    return round(t, 10)


def _sweep_row(args) -> np.ndarray:
    diag_t0, rows_t = args
    out = np.empty(len(rows_t))
    for j, pops_t in enumerate(rows_t):
        res = temporal_q(pops_t, diag_t0)
        if res.solver_status is not LPStatus.OPTIMAL:
            raise DynamicsError(f"kernel LP ended with status {res.solver_status.value}")
        out[j] = res.q_value
    return out


def qt_sweep(model: LindbladModel, initial_states=None, grid: SweepGrid | None = None,
             n_jobs: int = 1) -> np.ndarray:
    """Temporal kernel on every (t0, tau) grid point; rows index t0, columns tau.

    Each initial state is integrated once through all required times.  Rows
    are independent and merged in order, so ``n_jobs`` does not change the
    result.
    """
    grid = SweepGrid.uniform() if grid is None else grid
    initial_states = basis_initial_states(model.dim) if initial_states is None else list(initial_states)
    times = grid.times()
    index = {t: i for i, t in enumerate(times)}
    pops = np.empty((len(initial_states), len(times), model.dim))
    for k, rho0 in enumerate(initial_states):
        for i, state in enumerate(trajectory(model, rho0, times, grid.dt)):
            pops[k, i] = populations(state)

    jobs = []
    for t0 in grid.t0_values:
        diag_t0 = pops[:, index[_tkey(t0)]]
        rows_t = [pops[:, index[_tkey(t0 + tau)]] for tau in grid.tau_values]
        jobs.append((diag_t0, rows_t))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    return np.array(rows)


def rk4_order(model: LindbladModel, rho0, t: float = 2.0, dt: float = 0.1) -> float:
    """Observed convergence order from three step sizes dt, dt/2, dt/4."""
    a = evolve(model, rho0, t, dt, stepwise=True).matrix
    b = evolve(model, rho0, t, dt / 2, stepwise=True).matrix
    c = evolve(model, rho0, t, dt / 4, stepwise=True).matrix
    return float(np.log2(np.max(np.abs(a - b)) / np.max(np.abs(b - c))))
