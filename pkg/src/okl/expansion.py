"""The hypothesis as a kernel expansion over budget members.

Coefficients stay aligned index-for-index with the budget's member order.
The squared RKHS norm is tracked incrementally across updates so the ball
projection never needs a quadratic-form recomputation; removal rounds
recompute it exactly once.
"""

from __future__ import annotations

import numpy as np

__all__ = ["KernelExpansion", "redistribute_coefficients"]


def redistribute_coefficients(coeffs: np.ndarray, keep: int,
                              targets: np.ndarray) -> np.ndarray:
    """Fold the coefficients of dropped members onto kept ones.

    ``targets[j]`` is the kept index receiving the coefficient of dropped
    member ``keep + j``. Total coefficient mass is preserved.
    """
    out = coeffs[:keep].copy()
    np.add.at(out, targets, coeffs[keep:])
    return out


class KernelExpansion:
    """f = sum_i a_i kappa(x_i, .) with cached squared norm and a radius cap."""

    def __init__(self, radius: float, capacity: int):
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        self._coeffs = np.zeros(capacity)
        self._size = 0
        self.squared_norm = 0.0

    def __len__(self) -> int:
        return self._size

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs[: self._size]

    def norm(self) -> float:
        return float(np.sqrt(max(self.squared_norm, 0.0)))

    def _check_aligned(self, budget) -> None:
        if len(budget) != self._size:
            raise ValueError(
                f"expansion has {self._size} coefficients but budget has "
                f"{len(budget)} members")

    def extend(self) -> None:
        """Open a zero coefficient slot for a freshly inserted budget member."""
        if self._size >= self._coeffs.shape[0]:
            raise RuntimeError("expansion capacity exhausted")
        self._coeffs[self._size] = 0.0
        self._size += 1

    def evaluate_at(self, budget, x, cross: np.ndarray | None = None) -> float:
        """f(x); ``cross`` may pass a precomputed member kernel vector."""
        self._check_aligned(budget)
        if self._size == 0:
            return 0.0
        k = budget.cross(x) if cross is None else cross
        if k.shape[0] != self._size:
            raise ValueError(f"cross vector length {k.shape[0]} != {self._size}")
        return float(self.coefficients @ k)

    def dense_squared_norm(self, budget) -> float:
        """Quadratic form a^T K_S a recomputed from scratch (oracle path)."""
        self._check_aligned(budget)
        if self._size == 0:
            return 0.0
        a = self.coefficients
        return float(a @ budget.gram() @ a)

    def step_exact(self, budget, y: int, lam: float,
                   value_at_x: float | None = None,
                   self_sim: float | None = None) -> None:
        """Gradient step on the last member's own feature, then projection.

        The last budget member must be the stepped instance. ``value_at_x``
        is f(x) before the step and ``self_sim`` is kappa(x, x); both are
        evaluated here when not supplied.
        """
        self._check_aligned(budget)
        if self._size == 0:
            raise ValueError("step_exact requires the stepped instance in the budget")
        x = budget.instances[self._size - 1]
        if value_at_x is None:
            value_at_x = self.evaluate_at(budget, x)
        if self_sim is None:
            self_sim = budget.kernel.diag(x)
        self._coeffs[self._size - 1] += lam * y
        self.squared_norm += lam * lam * self_sim + 2.0 * lam * y * value_at_x
        if self.squared_norm < 0.0:
            self.squared_norm = 0.0
        self.project_to_ball()

    def step_approx(self, budget, y: int, lam: float, beta: np.ndarray,
                    cross: np.ndarray | None = None) -> None:
        """Gradient step on the projected feature Phi_S beta, then projection.

        With ``cross`` = k_S available, the norm bookkeeping uses
        beta^T k_S for the quadratic term and a^T k_S for the inner product
        with the current hypothesis; otherwise both come from the dense Gram.
        """
        self._check_aligned(budget)
        beta = np.asarray(beta, dtype=np.float64)
        if beta.shape[0] != self._size:
            raise ValueError(f"beta length {beta.shape[0]} != |S| = {self._size}")
        if self._size == 0:
            return
        a = self.coefficients
        if cross is None:
            Kb = budget.gram() @ beta
            quad = float(beta @ Kb)
            inner = float(a @ Kb)
        else:
            quad = float(beta @ cross)
            inner = float(a @ cross)
        self._coeffs[: self._size] += lam * y * beta
        self.squared_norm += lam * lam * quad + 2.0 * lam * y * inner
        if self.squared_norm < 0.0:
            self.squared_norm = 0.0
        self.project_to_ball()

    def project_to_ball(self) -> None:
        """Scale back onto the radius ball when the cached norm exceeds it."""
        limit = self.radius * self.radius
        if self.squared_norm > limit:
            self._coeffs[: self._size] *= self.radius / np.sqrt(self.squared_norm)
            self.squared_norm = limit

    def halve_and_redistribute(self, budget) -> None:
        """Drop the newest half of the budget, folding coefficients inward.

        Each dropped member's coefficient moves to the kept member most
        similar to it (ties to the smallest kept index). The surviving
        expansion is rescaled to have norm exactly ``radius``; a zero-norm
        result is left untouched.
        """
        self._check_aligned(budget)
        if budget.tracked:
            raise RuntimeError("removal is only defined for plain budgets")
        m = self._size
        if m != budget.capacity:
            raise ValueError(f"removal requires a full budget, |S| = {m} != {budget.capacity}")
        if m % 2 != 0:
            raise ValueError(f"removal requires an even budget size, got {m}")
        keep = m // 2
        kernel = budget.kernel
        kept = budget.instances[:keep]
        dropped = budget.instances[keep:]
        sim = kernel.pairwise(kept, dropped)
        targets = np.argmax(sim, axis=0)
        new_coeffs = redistribute_coefficients(self.coefficients, keep, targets)
        budget.keep_first(keep)
        self._coeffs[:keep] = new_coeffs
        self._size = keep
        sq = self.dense_squared_norm(budget)
        if sq <= 0.0:
            self.squared_norm = 0.0
            return
        self._coeffs[:keep] *= self.radius / np.sqrt(sq)
        self.squared_norm = self.radius * self.radius
