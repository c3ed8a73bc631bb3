"""Criterion kernels for coherence transfer.

The kernel compares the checkpoint populations of each output state with the
populations an incoherent (coherence-non-creating) process could produce from
the dephased outputs.  Such a process acts on diagonal states only through its
population-transfer matrix, a column-stochastic ``T`` with
``T[i, n] = P(i | n)``, so the minimization is the linear program

    min_T  sum_k sum_i | P_k[i] - (T @ w_k)[i] |

over column-stochastic ``T`` (``w_k`` the dephased populations).
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .networks import TRIANGLE_OUTCOMES, ScenarioData, TriangularClassicalModel
from .optimizer import LinearProgram, LPStatus, simplex_solve, to_standard_form

CERTIFY_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class PopulationTransferMatrix:
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError(f"transfer matrix must be square, got {t.shape}")
        if np.any(t < -1e-12) or np.any(np.abs(t.sum(axis=0) - 1.0) > 1e-9):
            raise ValueError("transfer matrix must be entrywise nonnegative with unit column sums")
        object.__setattr__(self, "t", np.clip(t, 0.0, None))

    @property
    def d(self) -> int:
        return self.t.shape[0]


@dataclass(frozen=True, eq=False)
class KernelResult:
    q_value: float
    minimizer: PopulationTransferMatrix | None
    solver_status: LPStatus

    @property
    def certifies(self) -> bool:
        """True when the kernel is distinguishable from numerical zero."""
        return self.solver_status is LPStatus.OPTIMAL and self.q_value > CERTIFY_THRESHOLD


def _tables(weights, targets) -> tuple[np.ndarray, np.ndarray]:
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    p = np.atleast_2d(np.asarray(targets, dtype=float))
    if w.shape != p.shape:
        raise ValueError(f"weight table {w.shape} and target table {p.shape} differ in shape")
    return w, p


def _kernel_lp(weights, targets) -> LinearProgram:
    w, p = _tables(weights, targets)
    n_set, d = w.shape
    # model variable T[i, m] sits at index i * d + m
    g = np.zeros((n_set * d, d * d))
    h = np.zeros(n_set * d)
    for k in range(n_set):
        for i in range(d):
            g[k * d + i, i * d : (i + 1) * d] = w[k]
            h[k * d + i] = p[k, i]
    col_sums = np.zeros((d, d * d))
    for m in range(d):
        col_sums[m, m::d] = 1.0
    return to_standard_form((g, h), (col_sums, np.ones(d)))


def build_kernel_lp(data: ScenarioData) -> LinearProgram:
    return _kernel_lp(data.diag_populations, data.checkpoint_populations)


def kernel_objective(weights, targets, t) -> float:
    """Kernel objective for a given transfer matrix ``t``."""
    w, p = _tables(weights, targets)
    return float(np.abs(p - w @ np.asarray(t).T).sum())


def _solve_kernel(weights, targets, max_iters: int) -> KernelResult:
    w, _ = _tables(weights, targets)
    d = w.shape[1]
    res = simplex_solve(_kernel_lp(weights, targets), max_iters=max_iters)
    if res.status is not LPStatus.OPTIMAL:
        return KernelResult(float("nan"), None, res.status)
    t = res.solution[: d * d].reshape(d, d)
    t = np.clip(t, 0.0, None)
    t = t / t.sum(axis=0, keepdims=True)
    q = max(res.optimum, 0.0) if res.optimum >= -1e-9 else res.optimum
    return KernelResult(float(q), PopulationTransferMatrix(t), res.status)


def criterion_q(data: ScenarioData, max_iters: int = 10_000) -> KernelResult:
    return _solve_kernel(data.diag_populations, data.checkpoint_populations, max_iters)


def temporal_q(populations_t, diag_t0, max_iters: int = 10_000) -> KernelResult:
    """Temporal kernel: populations at time ``t`` against the dephased
    populations at ``t0`` (one row per initial condition)."""
    w, p = _tables(diag_t0, populations_t)
    for name, table in (("diag_t0", w), ("populations_t", p)):
        if np.any(table < -1e-12) or np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError(f"{name} rows must be probability distributions")
    return _solve_kernel(np.clip(w, 0, None), np.clip(p, 0, None), max_iters)


def random_transfer_matrices(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` column-stochastic matrices with columns uniform on the simplex."""
    cols = rng.dirichlet(np.ones(d), size=(size, d))  # (size, column, row)
    return cols.transpose(0, 2, 1)


def sample_incapable_bound(data: ScenarioData, trials: int, seed: int, batch: int = 100_000) -> float:
    """Monte-Carlo upper bound on the kernel: best objective over ``trials``
    random column-stochastic matrices."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    w, p = data.diag_populations, data.checkpoint_populations
    best = np.inf
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        ts = random_transfer_matrices(data.d, size, rng)
        pred = np.einsum("sim,km->ski", ts, w)
        vals = np.abs(pred - p[None]).sum(axis=(1, 2))
        best = min(best, float(vals.min()))
        done += size
    return best


# --- incoherent channels (independent check of the LP reduction) -----------

def random_incoherent_kraus(d: int, rng: np.random.Generator, n_kraus: int = 3) -> list[np.ndarray]:
    """Random incoherent channel.

    Half the operators are weighted permutations ``sum_j c_j |f(j)><j|`` and
    the rest single-column maps ``c |f(j)><j|``, both incoherent with a
    diagonal ``K^dag K``; completeness comes from rescaling input columns.
    """
    ks = []
    for a in range(n_kraus):
        k = np.zeros((d, d), dtype=complex)
        if a % 2 == 0:
            f = rng.permutation(d)
            k[f, np.arange(d)] = rng.normal(size=d) + 1j * rng.normal(size=d)
        else:
            j = int(rng.integers(d))
            k[int(rng.integers(d)), j] = rng.normal() + 1j * rng.normal()
        ks.append(k)
    norms = np.sqrt(sum(np.sum(np.abs(k) ** 2, axis=0) for k in ks))
    return [k / norms for k in ks]


def apply_kraus(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def induced_transfer(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """``T[i, n] = <i| E(|n><n|) |i>``."""
    d = kraus[0].shape[1]
    t = np.empty((d, d))
    for n in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[n, n] = 1.0
        t[:, n] = np.real(np.diag(apply_kraus(kraus, e)))
    return t


def process_probe_states(d: int) -> dict[tuple[int, int, int], np.ndarray]:
    """Probe states ``psi_kmn`` used to tomograph a process: basis states
    (k=1), real superpositions (k=2) and complex superpositions (k=3)."""
    basis = np.eye(d, dtype=complex)
    probes = {}
    for m in range(d):
        probes[(1, m, m)] = basis[m]
    for m, n in itertools.permutations(range(d), 2):
        probes[(2, m, n)] = (basis[m] + basis[n]) / np.sqrt(2)
        probes[(3, m, n)] = (basis[m] + 1j * basis[n]) / np.sqrt(2)
    return probes


def is_incapable(kraus: Sequence[np.ndarray], atol: float = 1e-10) -> bool:
    """Check the incapable-process constraint set: every probe output is PSD
    and every basis-state output is diagonal."""
    d = kraus[0].shape[1]
    for (k, m, n), psi in process_probe_states(d).items():
        out = apply_kraus(kraus, np.outer(psi, psi.conj()))
        if np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0] < -atol:
            return False
        if k == 1 and np.max(np.abs(out - np.diag(np.diag(out)))) > atol:
            return False
    return True


# --- triangular network kernel ---------------------------------------------

_OUTCOMES = TRIANGLE_OUTCOMES


_SIGNS = np.array(_OUTCOMES, dtype=float)  # (8, 3)


def _triangle_objective_batch(x: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Objective for a batch of parameter vectors ``x`` of shape (..., 7)."""
    x = np.clip(x, 0.0, 1.0)
    g = x[..., :1]
    p = x[..., None, 1:4]
    q = x[..., None, 4:7]
    cw = np.prod(np.where(_SIGNS > 0, p, 1.0 - p), axis=-1)
    ccw = np.prod(np.where(_SIGNS > 0, q, 1.0 - q), axis=-1)
    return np.abs(target - (g * cw + (1.0 - g) * ccw)).sum(axis=-1)


def _triangle_objective(x, target) -> float:
    return float(_triangle_objective_batch(np.asarray(x, dtype=float), np.asarray(target, dtype=float)))


def _batched_nelder_mead(x0: np.ndarray, target: np.ndarray, iters: int = 200, cycles: int = 10,
                         step: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Nelder-Mead run independently from every row of ``x0`` inside the unit
    cube (trial points are clipped), all simplices advanced together.

    The objective has kinks, where simplices collapse early, so each start is
    rebuilt around its incumbent ``cycles`` times.
    """
    x = np.asarray(x0, dtype=float)
    for _ in range(cycles):
        vals, x = _nelder_mead_cycle(x, target, iters, step)
    return vals, x


def _nelder_mead_cycle(x0, target, iters, step):
    f = lambda pts: _triangle_objective_batch(pts, target)
    n_start, dim = x0.shape
    simplex = np.repeat(x0[:, None, :], dim + 1, axis=1)
    for j in range(dim):
        e = simplex[:, j + 1, j]
        simplex[:, j + 1, j] = np.where(e + step <= 1.0, e + step, e - step)
    simplex = np.clip(simplex, 0.0, 1.0)
    vals = f(simplex)
    rows = np.arange(n_start)
    for _ in range(iters):
        order = np.argsort(vals, axis=1, kind="stable")
        simplex = np.take_along_axis(simplex, order[..., None], axis=1)
        vals = np.take_along_axis(vals, order, axis=1)
        centroid = simplex[:, :-1].mean(axis=1)
        worst = simplex[:, -1]
        fw, fb, fsw = vals[:, -1], vals[:, 0], vals[:, -2]

        xr = np.clip(2 * centroid - worst, 0.0, 1.0)
        fr = f(xr)
        xe = np.clip(3 * centroid - 2 * worst, 0.0, 1.0)
        fe = f(xe)
        outside = fr < fw
        xc = np.where(outside[:, None], 0.5 * (centroid + xr), 0.5 * (centroid + worst))
        fc = f(xc)

        new_pt = worst.copy()
        new_val = fw.copy()
        expand = (fr < fb) & (fe < fr)
        reflect = (fr < fsw) & ~expand
        contract = ~(expand | reflect) & (fc < np.minimum(fr, fw))
        for mask, pt, val in ((expand, xe, fe), (reflect, xr, fr), (contract, xc, fc)):
            new_pt[mask] = pt[mask]
            new_val[mask] = val[mask]
        simplex[:, -1] = new_pt
        vals[:, -1] = new_val

        shrink = ~(expand | reflect | contract)
        if shrink.any():
            s = rows[shrink]
            best = simplex[s, :1]
            simplex[s, 1:] = best + 0.5 * (simplex[s, 1:] - best)
            vals[s, 1:] = f(simplex[s, 1:])
    i = np.argmin(vals, axis=1)
    return vals[rows, i], simplex[rows, i]


def _local_search(x0, target) -> tuple[float, np.ndarray]:
    opts = dict(xatol=1e-10, fatol=1e-12, maxiter=4000, maxfev=4000)
    res = minimize(_triangle_objective, x0, args=(target,), method="Nelder-Mead",
                   bounds=[(0.0, 1.0)] * 7, options=opts)
    return float(res.fun), np.clip(res.x, 0.0, 1.0)


def triangle_fit(p_quantum, restarts: int = 200, seed: int = 0, n_jobs: int = 1,
                 polish: int = 2) -> tuple[float, TriangularClassicalModel]:
    """Best classical-model fit to a post-selected three-party distribution.

    Seeds: the 5 best points of a 5x5x5 grid over (gamma, symmetric p,
    symmetric q) plus ``restarts`` uniform random points.  Every seed is
    refined by Nelder-Mead in the 7-cube; the incumbent is then polished
    ``polish`` times with scipy's bounded Nelder-Mead.  Starts are split into
    ``n_jobs`` contiguous chunks and merged by index, so the result does not
    depend on ``n_jobs``.
    """
    target = np.asarray(p_quantum, dtype=float).reshape(-1)
    if target.shape != (8,) or target.min() < -1e-12 or abs(target.sum() - 1.0) > 1e-9:
        raise ValueError("p_quantum must be a distribution over 8 outcomes")
    if restarts < 0:
        raise ValueError("restarts must be nonnegative")

    levels = np.linspace(0.0, 1.0, 5)
    grid = np.array([[g, p, p, p, q, q, q] for g, p, q in itertools.product(levels, repeat=3)])
    grid_vals = _triangle_objective_batch(grid, target)
    top = grid[np.argsort(grid_vals, kind="stable")[:5]]
    rng = np.random.default_rng(seed)
    starts = np.vstack([top, rng.random((restarts, 7))])

    # each start evolves independently, so chunking cannot change any row
    chunks = np.array_split(starts, max(1, min(n_jobs, len(starts))))
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda c: _batched_nelder_mead(c, target), chunks))
    else:
        parts = [_batched_nelder_mead(c, target) for c in chunks]
    vals = np.concatenate([p[0] for p in parts])
    xs = np.vstack([p[1] for p in parts])
    i = int(np.argmin(vals))  # first index wins ties
    best_val, best_x = float(vals[i]), xs[i]
    for _ in range(polish):
        val, x = _local_search(best_x, target)
        if val < best_val:
            best_val, best_x = val, x
    return best_val, TriangularClassicalModel.from_vector(best_x)


def triangle_q(p_quantum, restarts: int = 200, seed: int = 0, n_jobs: int = 1) -> float:
    return triangle_fit(p_quantum, restarts=restarts, seed=seed, n_jobs=n_jobs)[0]
