"""Comparison learners sharing the round protocol of the main learner.

Kernel OGD keeps an unbudgeted support set. FOGD replaces the kernel with
random Fourier features; NOGD with a Nystrom feature map built from the
first ``budget`` stream examples. All three predict the label sign and take
a stepsize-scaled hinge subgradient step on positive-loss rounds.
"""

from __future__ import annotations

import numpy as np

from .learner import RoundOutcome

__all__ = ["KernelOGDLearner", "FourierFeatureMap", "FOGDLearner",
           "NystromMap", "NOGDLearner", "baseline_stepsize_grid"]


def baseline_stepsize_grid(horizon: int) -> np.ndarray:
    """Stepsize candidates 10^{-3..3} / sqrt(T)."""
    return 10.0 ** np.arange(-3, 4) / np.sqrt(horizon)


class KernelOGDLearner:
    """Unbudgeted kernel online gradient descent with ball projection."""

    def __init__(self, kernel, eta: float, radius: float = 25.0):
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.kernel = kernel
        self.eta = float(eta)
        self.radius = float(radius)
        self._X: np.ndarray | None = None
        self._coeffs = np.zeros(0)
        self._size = 0
        self.squared_norm = 0.0
        self.t = 0
        self.mistakes = 0
        self.cumulative_loss = 0.0

    @property
    def support_size(self) -> int:
        return self._size

    def _support(self) -> np.ndarray:
        return self._X[: self._size]

    def _append(self, x: np.ndarray, coeff: float) -> None:
        if self._X is None:
            self._X = np.zeros((16, x.shape[0]))
            self._coeffs = np.zeros(16)
        elif self._size == self._X.shape[0]:
            self._X = np.concatenate([self._X, np.zeros_like(self._X)])
            self._coeffs = np.concatenate([self._coeffs, np.zeros_like(self._coeffs)])
        self._X[self._size] = x
        self._coeffs[self._size] = coeff
        self._size += 1

    def value(self, x) -> float:
        if self._size == 0:
            return 0.0
        k = self.kernel.cross(self._support(), x)
        return float(self._coeffs[: self._size] @ k)

    def step(self, x, y: int) -> RoundOutcome:
        margin = self.value(x)
        prediction = 1 if margin >= 0.0 else -1
        hinge_loss = max(0.0, 1.0 - y * margin)
        updated = False
        if hinge_loss > 0.0:
            updated = True
            self._append(np.asarray(x, dtype=np.float64).ravel(), self.eta * y)
            kxx = self.kernel.diag(x)
            self.squared_norm += self.eta ** 2 * kxx + 2.0 * self.eta * y * margin
            if self.squared_norm < 0.0:
                self.squared_norm = 0.0
            limit = self.radius * self.radius
            if self.squared_norm > limit:
                self._coeffs[: self._size] *= self.radius / np.sqrt(self.squared_norm)
                self.squared_norm = limit
        self.t += 1
        self.cumulative_loss += hinge_loss
        if prediction != y:
            self.mistakes += 1
        return RoundOutcome(prediction, hinge_loss, updated, 0.0, None, margin)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self._size == 0:
            return np.zeros(np.atleast_2d(X).shape[0])
        K = self.kernel.pairwise(X, self._support())
        return K @ self._coeffs[: self._size]

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


class FourierFeatureMap:
    """Random Fourier features for the Gaussian kernel.

    Frequencies are drawn from the kernel's spectral density (normal with
    variance 1/sigma^2 per coordinate), phases uniform in [0, 2pi). Feature
    vectors have squared norm at most 2.
    """

    def __init__(self, num_features: int, dim: int, sigma: float, seed: int):
        if num_features < 1 or dim < 1:
            raise ValueError("num_features and dim must be >= 1")
        rng = np.random.default_rng(seed)
        self.num_features = int(num_features)
        self.dim = int(dim)
        self.sigma = float(sigma)
        self.frequencies = rng.normal(0.0, 1.0 / sigma, size=(num_features, dim))
        self.phases = rng.uniform(0.0, 2.0 * np.pi, size=num_features)
        self.scale = np.sqrt(2.0 / num_features)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {self.dim}")
        Z = self.scale * np.cos(X @ self.frequencies.T + self.phases)
        return Z[0] if single else Z


class FOGDLearner:
    """Linear OGD on random Fourier features."""

    def __init__(self, feature_map: FourierFeatureMap, eta: float):
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.feature_map = feature_map
        self.eta = float(eta)
        self.weights = np.zeros(feature_map.num_features)
        self.t = 0
        self.mistakes = 0
        self.cumulative_loss = 0.0

    def step(self, x, y: int) -> RoundOutcome:
        z = self.feature_map.transform(x)
        margin = float(self.weights @ z)
        prediction = 1 if margin >= 0.0 else -1
        hinge_loss = max(0.0, 1.0 - y * margin)
        updated = False
        if hinge_loss > 0.0:
            updated = True
            self.weights += self.eta * y * z
        self.t += 1
        self.cumulative_loss += hinge_loss
        if prediction != y:
            self.mistakes += 1
        return RoundOutcome(prediction, hinge_loss, updated, 0.0, None, margin)

    def decision_function(self, X) -> np.ndarray:
        return self.feature_map.transform(np.atleast_2d(np.asarray(X))) @ self.weights

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


class NystromMap:
    """Rank-k Nystrom feature map from a fixed landmark set.

    Feature inner products reproduce the Nystrom kernel approximation; with
    full rank they match the exact kernel on landmark pairs.
    """

    def __init__(self, kernel, landmarks: np.ndarray, rank: int,
                 ridge: float = 1e-10):
        landmarks = np.asarray(landmarks, dtype=np.float64)
        n = landmarks.shape[0]
        if not 1 <= rank <= n:
            raise ValueError(f"rank must lie in [1, {n}], got {rank}")
        self.kernel = kernel
        self.landmarks = landmarks
        self.rank = int(rank)
        K = kernel.gram(landmarks) + ridge * np.eye(n)
        vals, vecs = np.linalg.eigh(K)
        vals = vals[::-1][: self.rank]
        vecs = vecs[:, ::-1][:, : self.rank]
        vals = np.maximum(vals, ridge)
        self.factor = (vecs / np.sqrt(vals)).T   # (rank, n)
        self._landmark_gram = K

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X.reshape(1, -1)
        Z = self.kernel.pairwise(X, self.landmarks) @ self.factor.T
        return Z[0] if single else Z

    def lift_expansion(self, coeffs: np.ndarray) -> np.ndarray:
        """Feature-space weights equivalent to a landmark kernel expansion."""
        return self.factor @ (self._landmark_gram @ np.asarray(coeffs))


class NOGDLearner:
    """Nystrom OGD: kernel OGD while collecting the first ``budget`` stream
    examples as landmarks, then linear OGD in the induced feature space."""

    def __init__(self, kernel, budget: int, eta: float, radius: float = 25.0,
                 rank_fraction: float = 0.2, ridge: float = 1e-10):
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.kernel = kernel
        self.budget = int(budget)
        self.eta = float(eta)
        self.radius = float(radius)
        self.rank = max(1, int(round(rank_fraction * budget)))
        self.ridge = float(ridge)
        self._landmarks: list[np.ndarray] = []
        self._coeffs = np.zeros(budget)
        self.squared_norm = 0.0
        self.feature_map: NystromMap | None = None
        self.weights: np.ndarray | None = None
        self.t = 0
        self.mistakes = 0
        self.cumulative_loss = 0.0

    def _collect_step(self, x, y: int) -> RoundOutcome:
        x = np.asarray(x, dtype=np.float64).ravel()
        m = len(self._landmarks)
        if m:
            k = self.kernel.cross(np.asarray(self._landmarks), x)
            margin = float(self._coeffs[:m] @ k)
        else:
            margin = 0.0
        prediction = 1 if margin >= 0.0 else -1
        hinge_loss = max(0.0, 1.0 - y * margin)
        updated = False
        self._landmarks.append(x.copy())
        if hinge_loss > 0.0:
            updated = True
            self._coeffs[m] = self.eta * y
            kxx = self.kernel.diag(x)
            self.squared_norm += self.eta ** 2 * kxx + 2.0 * self.eta * y * margin
            if self.squared_norm < 0.0:
                self.squared_norm = 0.0
            limit = self.radius * self.radius
            if self.squared_norm > limit:
                self._coeffs[: m + 1] *= self.radius / np.sqrt(self.squared_norm)
                self.squared_norm = limit
        if len(self._landmarks) == self.budget:
            self.feature_map = NystromMap(self.kernel, np.asarray(self._landmarks),
                                          rank=self.rank, ridge=self.ridge)
            self.weights = self.feature_map.lift_expansion(self._coeffs)
        return RoundOutcome(prediction, hinge_loss, updated, 0.0, None, margin)

    def step(self, x, y: int) -> RoundOutcome:
        if self.feature_map is None:
            out = self._collect_step(x, y)
        else:
            z = self.feature_map.transform(x)
            margin = float(self.weights @ z)
            prediction = 1 if margin >= 0.0 else -1
            hinge_loss = max(0.0, 1.0 - y * margin)
            updated = False
            if hinge_loss > 0.0:
                updated = True
                self.weights += self.eta * y * z
            out = RoundOutcome(prediction, hinge_loss, updated, 0.0, None, margin)
        self.t += 1
        self.cumulative_loss += out.hinge_loss
        if out.prediction != y:
            self.mistakes += 1
        return out

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.feature_map is not None:
            return self.feature_map.transform(X) @ self.weights
        m = len(self._landmarks)
        if m == 0:
            return np.zeros(X.shape[0])
        K = self.kernel.pairwise(X, np.asarray(self._landmarks))
        return K @ self._coeffs[:m]

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)
