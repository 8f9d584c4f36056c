"""The ordered support set with ALD projection machinery.

In *tracked* mode the budget maintains the inverse Gram matrix of its
members incrementally (Projectron-style rank-one update), which makes the
ALD projection-error test an O(|S|^2) operation. In *plain* mode the budget
is an append-only store with a hard capacity; the caller is responsible for
triggering removal before it fills.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AldResult", "BudgetSet", "DegenerateInsertionError"]

# Below this projection error the rank-one inverse update is numerically
# unsafe; insertion is refused instead.
MIN_INSERTION_ALPHA = 1e-12


class DegenerateInsertionError(RuntimeError):
    """Raised when a tracked insertion would divide by a vanishing alpha."""


@dataclass
class AldResult:
    """Projection of a candidate kernel feature onto the budget span.

    beta are the optimal projection coefficients, alpha the squared residual
    (clamped to [0, D]), and holds the threshold test sqrt(alpha) <= tau.
    cross keeps the kernel vector k_S used in the solve so callers can reuse
    it (beta @ cross equals the quadratic form beta^T K_S beta).
    """

    beta: np.ndarray
    alpha: float
    holds: bool
    cross: np.ndarray
    self_similarity: float


class BudgetSet:
    """Ordered support set with optional inverse-Gram tracking.

    Members are kept in arrival order. Instance storage is allocated lazily
    from the first inserted instance (feature rows for vector kernels, index
    scalars for precomputed ones).
    """

    def __init__(self, kernel, capacity: int, tracked: bool = True,
                 check_consistency: bool = False):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.kernel = kernel
        self.capacity = int(capacity)
        self.tracked = bool(tracked)
        self.check_consistency = bool(check_consistency)
        self._store = None          # (capacity, d) float or (capacity,) int
        self._labels = np.zeros(self.capacity, dtype=np.int64)
        self._arrival = np.zeros(self.capacity, dtype=np.int64)
        self._inv = None            # (capacity, capacity) buffer, tracked only
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def instances(self) -> np.ndarray:
        if self._store is None:
            return np.zeros((0, 0))
        return self._store[: self._size]

    @property
    def labels(self) -> np.ndarray:
        return self._labels[: self._size]

    @property
    def arrival_indices(self) -> np.ndarray:
        return self._arrival[: self._size]

    @property
    def inverse_gram(self) -> np.ndarray | None:
        if not self.tracked or self._inv is None:
            return None
        return self._inv[: self._size, : self._size]

    def _allocate(self, x) -> None:
        if getattr(self.kernel, "kind", None) == "precomputed":
            self._store = np.zeros(self.capacity, dtype=np.intp)
        else:
            self._store = np.zeros((self.capacity, np.asarray(x).ravel().shape[0]))

    def _write(self, x, y: int, arrival: int) -> None:
        if self._store is None:
            self._allocate(x)
        m = self._size
        if self._store.ndim == 1:
            self._store[m] = int(np.asarray(x).ravel()[0])
        else:
            self._store[m] = np.asarray(x, dtype=np.float64).ravel()
        self._labels[m] = y
        self._arrival[m] = arrival
        self._size = m + 1

    def cross(self, x) -> np.ndarray:
        """Kernel values between every member and x, in member order."""
        if self._size == 0:
            return np.zeros(0)
        return self.kernel.cross(self.instances, x)

    def gram(self) -> np.ndarray:
        if self._size == 0:
            raise ValueError("gram of an empty budget")
        return self.kernel.gram(self.instances)

    # -- tracked mode ----------------------------------------------------

    def ald_check(self, x, threshold: float, cross: np.ndarray | None = None) -> AldResult:
        """Projection error of the feature of x onto the member span.

        An empty budget yields alpha = D by convention. ``cross`` may pass a
        precomputed kernel vector k_S to avoid re-evaluation.
        """
        if not self.tracked:
            raise RuntimeError("ald_check requires a tracked budget")
        kxx = self.kernel.diag(x)
        D = self.kernel.upper_bound
        if self._size == 0:
            alpha = D
            return AldResult(np.zeros(0), alpha, np.sqrt(alpha) <= threshold,
                             np.zeros(0), kxx)
        k_s = self.cross(x) if cross is None else np.asarray(cross, dtype=np.float64)
        if k_s.shape[0] != self._size:
            raise ValueError(f"cross vector length {k_s.shape[0]} != |S| = {self._size}")
        beta = self.inverse_gram @ k_s
        alpha = float(kxx - k_s @ beta)
        alpha = min(max(alpha, 0.0), D)
        return AldResult(beta, alpha, np.sqrt(alpha) <= threshold, k_s, kxx)

    def insert_tracked(self, x, y: int, prior: AldResult, arrival: int | None = None) -> None:
        """Append a member and extend the inverse Gram by a rank-one update.

        ``prior`` must be the AldResult computed for this exact budget and x.
        """
        if not self.tracked:
            raise RuntimeError("insert_tracked requires a tracked budget")
        if self._size >= self.capacity:
            raise RuntimeError(f"budget is full (capacity {self.capacity})")
        if prior.alpha < MIN_INSERTION_ALPHA:
            raise DegenerateInsertionError(
                f"projection error {prior.alpha:g} too small for a stable "
                f"inverse update")
        m = self._size
        if self._inv is None:
            self._inv = np.zeros((self.capacity, self.capacity))
        if m == 0:
            kxx = prior.self_similarity
            self._inv[0, 0] = 1.0 / kxx
        else:
            v = np.empty(m + 1)
            v[:m] = prior.beta
            v[m] = -1.0
            view = self._inv[: m + 1, : m + 1]
            view[m, :] = 0.0
            view[:, m] = 0.0
            view += np.outer(v, v) / prior.alpha
        self._write(x, y, self._size if arrival is None else arrival)
        if self.check_consistency and self.inverse_consistency_error() > 1e-6:
            self.rebuild_inverse()

    def inverse_consistency_error(self) -> float:
        """Max-entry error of K_S @ inverse_gram against the identity."""
        if not self.tracked or self._size == 0:
            return 0.0
        K = self.gram()
        return float(np.max(np.abs(K @ self.inverse_gram - np.eye(self._size))))

    def rebuild_inverse(self) -> None:
        """Recompute the inverse Gram from scratch (fallback path)."""
        if not self.tracked:
            raise RuntimeError("rebuild_inverse requires a tracked budget")
        if self._size == 0:
            return
        if self._inv is None:
            self._inv = np.zeros((self.capacity, self.capacity))
        m = self._size
        self._inv[:m, :m] = np.linalg.inv(self.gram())

    # -- plain mode --------------------------------------------------------

    def insert_plain(self, x, y: int, arrival: int | None = None) -> None:
        if self.tracked:
            raise RuntimeError("insert_plain requires a plain budget")
        if self._size >= self.capacity:
            raise RuntimeError(f"budget is full (capacity {self.capacity})")
        self._write(x, y, self._size if arrival is None else arrival)

    def to_plain(self) -> None:
        """Switch to append-only mode; inverse tracking stops permanently."""
        self.tracked = False
        self._inv = None

    def keep_first(self, count: int) -> None:
        """Truncate to the ``count`` oldest members (arrival order)."""
        if self.tracked:
            raise RuntimeError("removal is only defined for plain budgets")
        if not 0 <= count <= self._size:
            raise ValueError(f"cannot keep {count} of {self._size} members")
        self._size = count

    # -- diagnostics ---------------------------------------------------------

    def determinant_ratio(self, x) -> float:
        """det(K_{S + x}) / det(K_S); equals the ALD projection error.

        Exact-determinant test facility, limited to |S| <= 12.
        """
        if self._size > 12:
            raise ValueError("determinant check limited to |S| <= 12")
        kxx = self.kernel.diag(x)
        if self._size == 0:
            return kxx
        K = self.gram()
        det_s = float(np.linalg.det(K))
        if abs(det_s) < 1e-300:
            raise ValueError("member Gram is singular beyond tolerance")
        m = self._size
        K_aug = np.empty((m + 1, m + 1))
        K_aug[:m, :m] = K
        k_s = self.cross(x)
        K_aug[:m, m] = k_s
        K_aug[m, :m] = k_s
        K_aug[m, m] = kxx
        return float(np.linalg.det(K_aug)) / det_s
