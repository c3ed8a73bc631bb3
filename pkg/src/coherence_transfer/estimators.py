"""scikit-learn style wrappers around the criterion kernels.

Rows of ``X`` are the dephased populations of each output state and rows of
``y`` the populations measured after the checkpoint.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .capability import CERTIFY_THRESHOLD, _solve_kernel, temporal_q
from .optimizer import LPStatus


def check_population_table(table, name: str = "X") -> np.ndarray:
    """Validate a table whose rows are probability distributions."""
    a = check_array(table, dtype=np.float64, ensure_min_features=2)
    if np.any(a < -1e-12):
        raise ValueError(f"{name} has negative entries")
    sums = a.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(f"row {bad} of {name} sums to {sums[bad]!r}, expected 1")
    return np.clip(a, 0.0, None)


class CoherenceTransferCriterion(BaseEstimator):
    """Kernel fitted by the best incoherent population-transfer matrix.

    After ``fit``: ``q_`` (kernel value), ``transfer_matrix_`` (minimizer,
    column-stochastic), ``status_`` and ``certified_``.
    """

    def __init__(self, max_iters: int = 10_000, threshold: float = CERTIFY_THRESHOLD):
        self.max_iters = max_iters
        self.threshold = threshold

    def _validate(self, X, y):
        w = check_population_table(X, "X")
        p = check_population_table(y, "y")
        if w.shape != p.shape:
            raise ValueError(f"X {w.shape} and y {p.shape} differ in shape")
        return w, p

    def fit(self, X, y):
        w, p = self._validate(X, y)
        res = _solve_kernel(w, p, self.max_iters)
        self._store(res, w.shape[1])
        return self

    def _store(self, res, d):
        if res.solver_status is not LPStatus.OPTIMAL:
            raise RuntimeError(f"kernel LP ended with status {res.solver_status.value}")
        self.q_ = res.q_value
        self.transfer_matrix_ = res.minimizer.t
        self.status_ = res.solver_status
        self.certified_ = bool(self.q_ > self.threshold)
        self.n_features_in_ = d

    def predict(self, X):
        """Populations an incoherent process would produce from ``X``."""
        check_is_fitted(self, "transfer_matrix_")
        w = check_population_table(X, "X")
        if w.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {w.shape[1]} outcomes, fitted with {self.n_features_in_}")
        return w @ self.transfer_matrix_.T

    def score(self, X, y):
        """Negative residual sum ``-sum |y - predict(X)|`` (higher is better)."""
        _, p = self._validate(X, y)
        return -float(np.abs(p - self.predict(X)).sum())


class TemporalCoherenceCriterion(CoherenceTransferCriterion):
    """Temporal variant: ``X`` holds the dephased populations at ``t0`` and
    ``y`` the populations at the later time."""

    def fit(self, X, y):
        w, p = self._validate(X, y)
        res = temporal_q(p, w, self.max_iters)
        self._store(res, w.shape[1])
        return self
