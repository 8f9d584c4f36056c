"""Sliding-window optimistic gradient estimator and its gap quantities.

The window holds the last M received examples (every round, not only loss
rounds). The negative window average of labeled kernel features predicts the
next hinge gradient; the clipped gap between the actual and predicted
gradient drives the adaptive learning rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OptimismWindow", "DeltaRecord", "gradient_gap_exact",
           "gradient_gap_approx"]


@dataclass
class DeltaRecord:
    """Clipped optimism error for one round.

    raw is ||g_used - g_pred||^2 - ||g_pred||^2; delta clips it at zero.
    """

    delta: float
    raw: float
    used_exact_gradient: bool


class OptimismWindow:
    """Ring buffer of the last ``capacity`` (instance, label) pairs.

    ``push`` returns the physical slot written so callers that cache
    per-entry derived data (the learner's window-by-budget cross matrix) can
    overwrite the matching row.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._X = None
        self._y = np.zeros(self.capacity, dtype=np.int64)
        self._size = 0
        self._next = 0

    def __len__(self) -> int:
        return self._size

    @property
    def instances(self) -> np.ndarray:
        if self._X is None:
            return np.zeros((0, 0))
        return self._X[: self._size]

    @property
    def labels(self) -> np.ndarray:
        return self._y[: self._size]

    def _allocate(self, x, precomputed: bool) -> None:
        if precomputed:
            self._X = np.zeros(self.capacity, dtype=np.intp)
        else:
            self._X = np.zeros((self.capacity, np.asarray(x).ravel().shape[0]))

    def push(self, x, y: int, precomputed: bool = False) -> int:
        """Store one example, evicting the oldest when full; returns the slot."""
        if self._X is None:
            self._allocate(x, precomputed)
        slot = self._next
        if self._X.ndim == 1:
            self._X[slot] = int(np.asarray(x).ravel()[0])
        else:
            self._X[slot] = np.asarray(x, dtype=np.float64).ravel()
        self._y[slot] = y
        self._next = (slot + 1) % self.capacity
        if self._size < self.capacity:
            self._size += 1
        return slot

    def cross(self, kernel, x) -> np.ndarray:
        """Kernel values between each stored entry (slot order) and x."""
        if self._size == 0:
            return np.zeros(0)
        return kernel.cross(self.instances, x)

    def value_at(self, kernel, x, cross: np.ndarray | None = None) -> float:
        """Label-weighted window average of kernel values at x; 0 when empty.

        This is the value of the (negated) optimistic gradient estimate.
        """
        if self._size == 0:
            return 0.0
        k = self.cross(kernel, x) if cross is None else cross
        return float(self.labels @ k) / self._size


def gradient_gap_exact(window: OptimismWindow, kernel, x, y: int,
                       value: float | None = None) -> DeltaRecord:
    """Gap record for a round whose update used the exact hinge gradient.

    raw = kappa(x, x) - 2 y * window.value_at(x).
    """
    if value is None:
        value = window.value_at(kernel, x)
    raw = kernel.diag(x) - 2.0 * y * value
    return DeltaRecord(max(raw, 0.0), raw, True)


def gradient_gap_approx(window: OptimismWindow, kernel, budget, beta, y: int,
                        quad: float | None = None,
                        cross_matrix: np.ndarray | None = None) -> DeltaRecord:
    """Gap record for a round whose update used the projected gradient.

    raw = beta^T K_S beta - 2 y * (window average of the projected feature's
    values at the window points). With ``quad`` (= beta^T k_S from the ALD
    solve) and ``cross_matrix`` (rows: kernel values between each window slot
    and every budget member) supplied, no new kernel evaluations happen;
    otherwise both terms are computed from pairwise kernel calls.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != len(budget):
        raise ValueError(f"beta length {beta.shape[0]} != |S| = {len(budget)}")
    m = len(window)
    if quad is None:
        if len(budget) == 0:
            quad = 0.0
        else:
            quad = float(beta @ budget.gram() @ beta)
    if m == 0 or len(budget) == 0:
        mix = 0.0
    else:
        if cross_matrix is None:
            cross_matrix = kernel.pairwise(window.instances, budget.instances)
        else:
            cross_matrix = cross_matrix[:m, : len(budget)]
        mix = float(window.labels @ (cross_matrix @ beta)) / m
    raw = quad - 2.0 * y * mix
    return DeltaRecord(max(raw, 0.0), raw, False)
