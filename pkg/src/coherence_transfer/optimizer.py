"""Dense two-phase primal simplex for small standard-form LPs.

    minimize    c @ x
    subject to  A @ x == b,  x >= 0

The lowest-index improving column enters (Bland).  Among rows tied in the
ratio test up to FEAS_TOL the largest pivot leaves, then the lowest basic
index.  An iteration cap guards against cycling; every choice is
deterministic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PIVOT_TOL = 1e-9
CLEAN_TOL = 1e-13
FEAS_TOL = 1e-9


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    # number of leading variables that belong to the caller's model; the
    # rest are slacks/surpluses introduced by to_standard_form
    n_model: int | None = None

    def __post_init__(self):
        c = np.asarray(self.cost, dtype=float).reshape(-1)
        a = np.asarray(self.eq_matrix, dtype=float)
        b = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        if a.ndim != 2:
            a = a.reshape(0, c.shape[0]) if a.size == 0 else a
        if a.shape != (b.shape[0], c.shape[0]):
            raise ValueError(f"eq_matrix shape {a.shape} inconsistent with cost ({c.shape[0]}) and rhs ({b.shape[0]})")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "cost", c)
        object.__setattr__(self, "eq_matrix", a)
        object.__setattr__(self, "eq_rhs", b)
        if self.n_model is None:
            object.__setattr__(self, "n_model", c.shape[0])

    @property
    def n_vars(self) -> int:
        return self.cost.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.eq_rhs.shape[0]


@dataclass(eq=False)
class LPResult:
    status: LPStatus
    optimum: float
    solution: np.ndarray
    reduced_costs: np.ndarray = field(repr=False, default=None)
    iterations: int = 0

    def __iter__(self):
        # allows ``status, optimum, x = simplex_solve(lp)``
        return iter((self.status, self.optimum, self.solution))


def to_standard_form(abs_terms, eq_constraints=None, upper_bounds=None) -> LinearProgram:
    """Epigraph reformulation of ``min sum_j |G[j] @ x - h[j]|``.

    ``abs_terms`` is ``(G, h)``; ``eq_constraints`` an optional ``(A, b)``
    with ``A @ x == b``; ``upper_bounds`` optional per-variable caps (``inf``
    for none).  Every model variable is nonnegative.  Each absolute term gets
    an epigraph variable ``s_j`` with ``s_j - r_j - u_j = 0`` and
    ``s_j + r_j - v_j = 0`` (``r_j = G[j] @ x - h[j]``, surpluses
    ``u_j, v_j >= 0``).

    Variable layout: ``[x (n), s (m), u (m), v (m), caps]``.
    """
    g, h = abs_terms
    g = np.atleast_2d(np.asarray(g, dtype=float))
    h = np.asarray(h, dtype=float).reshape(-1)
    m, n = g.shape
    if h.shape[0] != m:
        raise ValueError(f"{m} absolute terms but {h.shape[0]} offsets")
    if eq_constraints is not None:
        a_eq, b_eq = eq_constraints
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
        b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
        if a_eq.shape != (b_eq.shape[0], n):
            raise ValueError(f"equality block {a_eq.shape} does not match {n} variables / {b_eq.shape[0]} rows")
    else:
        a_eq, b_eq = np.zeros((0, n)), np.zeros(0)
    caps = np.full(n, np.inf) if upper_bounds is None else np.asarray(upper_bounds, dtype=float).reshape(-1)
    if caps.shape[0] != n:
        raise ValueError(f"{caps.shape[0]} upper bounds for {n} variables")
    capped = np.flatnonzero(np.isfinite(caps))
    if np.any(caps[capped] < 0):
        raise ValueError("upper bounds must be nonnegative")

    n_cap = capped.shape[0]
    n_tot = n + 3 * m + n_cap
    rows = []
    rhs = []
    for i in range(a_eq.shape[0]):
        r = np.zeros(n_tot)
        r[:n] = a_eq[i]
        rows.append(r)
        rhs.append(b_eq[i])
    eye = np.eye(m)
    top = np.zeros((m, n_tot))
    top[:, :n] = -g
    top[:, n : n + m] = eye
    top[:, n + m : n + 2 * m] = -eye
    bot = np.zeros((m, n_tot))
    bot[:, :n] = g
    bot[:, n : n + m] = eye
    bot[:, n + 2 * m : n + 3 * m] = -eye
    rows.extend(top)
    rhs.extend(-h)
    rows.extend(bot)
    rhs.extend(h)
    for j, var in enumerate(capped):
        r = np.zeros(n_tot)
        r[var] = 1.0
        r[n + 3 * m + j] = 1.0
        rows.append(r)
        rhs.append(caps[var])
    cost = np.zeros(n_tot)
    cost[n : n + m] = 1.0
    a = np.array(rows) if rows else np.zeros((0, n_tot))
    return LinearProgram(cost, a, np.array(rhs), n_model=n)


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    tab -= np.outer(col_vals, tab[row])
    # flush round-off so it cannot later be chosen as a pivot
    tab[np.abs(tab) < CLEAN_TOL] = 0.0


def _run_phase(tab, basis, n_cols, max_iters, iters):
    """Bland-rule simplex on ``tab`` whose last row holds reduced costs and
    last column the rhs.  Only the first ``n_cols`` columns may enter."""
    m = tab.shape[0] - 1
    while True:
        if iters >= max_iters:
            return LPStatus.ITERATION_LIMIT, iters
        rc = tab[-1, :n_cols]
        entering = np.flatnonzero(rc < -FEAS_TOL)
        if entering.size == 0:
            return LPStatus.OPTIMAL, iters
        col = int(entering[0])
        column = tab[:m, col]
        eligible = np.flatnonzero(column > PIVOT_TOL * max(1.0, np.abs(column).max()))
        if eligible.size == 0:
            return LPStatus.UNBOUNDED, iters
        ratios = np.maximum(tab[eligible, -1], 0.0) / column[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + FEAS_TOL]
        # largest pivot among near-ties for stability, lowest basic index after that
        row = int(min(ties, key=lambda r: (-round(column[r], 12), basis[r])))
        _pivot(tab, row, col)
        basis[row] = col
        iters += 1


def simplex_solve(lp: LinearProgram, max_iters: int = 10_000) -> LPResult:
    c, a, b = lp.cost, lp.eq_matrix.copy(), lp.eq_rhs.copy()
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial variables n..n+m-1
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -a.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, iters = _run_phase(tab, basis, n + m, max_iters, 0)
    if status is LPStatus.UNBOUNDED:
        # phase 1 is bounded below by zero; this only happens on round-off blow-up
        raise FloatingPointError("phase 1 reported an unbounded ray; tableau is ill-conditioned")
    if status is LPStatus.ITERATION_LIMIT:
        return LPResult(status, float("nan"), np.full(n, np.nan), iterations=iters)
    if -tab[-1, -1] > FEAS_TOL:
        return LPResult(LPStatus.INFEASIBLE, float("nan"), np.full(n, np.nan), iterations=iters)

    # drive artificials out of the basis; drop rows that are redundant
    keep_rows = []
    for r in range(m):
        if basis[r] >= n:
            candidates = np.flatnonzero(np.abs(tab[r, :n]) > PIVOT_TOL)
            if candidates.size == 0:
                continue
            col = int(candidates[0])
            _pivot(tab, r, col)
            basis[r] = col
        keep_rows.append(r)
    tab = np.vstack([tab[keep_rows][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep_rows]
    k = len(basis)

    # phase 2 objective row: c - c_B B^-1 A
    tab[-1, :n] = c
    for r, var in enumerate(basis):
        tab[-1] -= c[var] * tab[r]
    status, iters = _run_phase(tab, basis, n, max_iters, iters)

    x = np.zeros(n)
    for r, var in enumerate(basis[:k]):
        x[var] = tab[r, -1]
    x[np.abs(x) < 1e-13] = 0.0
    # round-off can leave basic values a hair below zero
    x[(x < 0.0) & (x > -FEAS_TOL)] = 0.0
    reduced = tab[-1, :n].copy()
    if status is LPStatus.UNBOUNDED:
        return LPResult(status, float("-inf"), x, reduced, iters)
    return LPResult(status, float(c @ x), x, reduced, iters)


def vertex_enumeration(lp: LinearProgram, tol: float = 1e-9) -> tuple[LPStatus, float, np.ndarray]:
    """Brute-force optimum over every basic feasible solution.

    Independent of the simplex path; practical only for a dozen or so
    variables.  Unboundedness is not detected, so callers should pass
    bounded feasible regions.
    """
    a, b, c = lp.eq_matrix, lp.eq_rhs, lp.cost
    m, n = a.shape
    rank = np.linalg.matrix_rank(a) if m else 0
    # keep a maximal set of independent rows
    rows: list[int] = []
    for r in range(m):
        if np.linalg.matrix_rank(a[rows + [r]]) > len(rows):
            rows.append(r)
    a, b = a[rows], b[rows]
    best, best_x = np.inf, None
    for cols in itertools.combinations(range(n), rank):
        sub = a[:, cols]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        xb = np.linalg.solve(sub, b)
        if np.any(xb < -tol):
            continue
        x = np.zeros(n)
        x[list(cols)] = np.clip(xb, 0.0, None)
        val = float(c @ x)
        if val < best - 1e-12:
            best, best_x = val, x
    if best_x is None:
        return LPStatus.INFEASIBLE, float("nan"), np.full(n, np.nan)
    return LPStatus.OPTIMAL, best, best_x


def random_bounded_lp(rng: np.random.Generator, max_vars: int = 12) -> LinearProgram:
    """Feasible, bounded standard-form LP with at most ``max_vars`` variables.

    A capacity row ``sum(x) + slack == cap`` bounds the region; the rhs comes
    from a random nonnegative point so the problem is feasible.
    """
    n = int(rng.integers(3, max_vars))  # model vars, plus one slack
    m = int(rng.integers(1, min(n, 5) + 1))
    a = np.round(rng.normal(size=(m, n)), 3)
    x0 = rng.random(n)
    b = a @ x0
    cap = x0.sum() + 1.0 + rng.random()
    a_full = np.zeros((m + 1, n + 1))
    a_full[:m, :n] = a
    a_full[m] = 1.0
    rhs = np.append(b, cap)
    cost = np.append(np.round(rng.normal(size=n), 3), 0.0)
    return LinearProgram(cost, a_full, rhs, n_model=n)
