"""Kernel evaluation, Gram matrices, and eigen-spectrum diagnostics.

Two kinds of kernel are supported. :class:`GaussianKernel` works on dense
feature vectors. :class:`PrecomputedKernel` wraps a fixed symmetric PSD
matrix and treats row indices as instances, which lets the budget machinery
run against exactly prescribed spectra. Both expose the same small surface
(``__call__``, ``diag``, ``cross``, ``pairwise``, ``gram``) so the learner
code never branches on the kernel kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import ortho_group

__all__ = [
    "GaussianKernel",
    "PrecomputedKernel",
    "CountingKernel",
    "SpectrumProfile",
    "eigenvalues",
    "synthesize_psd",
]

# Eigenvalues of an n x n PSD Gram matrix are accepted down to -PSD_SLACK*n*D.
PSD_SLACK = 1e-8

_EIG_SIZE_CAP = 5000


class GaussianKernel:
    """Gaussian (RBF) kernel exp(-||x - v||^2 / (2 sigma^2)) on dense vectors.

    The kernel maps into (0, 1]; the diagonal is exactly 1, so the declared
    value bounds are ``lower_bound = upper_bound = 1``.
    """

    kind = "gaussian"

    def __init__(self, sigma: float):
        sigma = float(sigma)
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.sigma = sigma
        self.lower_bound = 1.0
        self.upper_bound = 1.0
        self._inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma)

    def __repr__(self):
        return f"GaussianKernel(sigma={self.sigma})"

    def _as_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        return X

    def __call__(self, x, v) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        v = np.asarray(v, dtype=np.float64).ravel()
        if x.shape != v.shape:
            raise ValueError(f"dimension mismatch: {x.shape} vs {v.shape}")
        d = x - v
        return float(np.exp(-(d @ d) * self._inv_two_sigma_sq))

    def diag(self, x) -> float:
        return 1.0

    def cross(self, X, v) -> np.ndarray:
        """Vector of kernel values between each row of X and the vector v."""
        X = self._as_matrix(X)
        if X.shape[0] == 0:
            return np.zeros(0)
        v = np.asarray(v, dtype=np.float64).ravel()
        if X.shape[1] != v.shape[0]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {v.shape[0]}")
        d = X - v
        return np.exp(-np.einsum("ij,ij->i", d, d) * self._inv_two_sigma_sq)

    def pairwise(self, X, V) -> np.ndarray:
        """Kernel matrix between rows of X and rows of V."""
        X = self._as_matrix(X)
        V = self._as_matrix(V)
        if X.shape[0] == 0 or V.shape[0] == 0:
            return np.zeros((X.shape[0], V.shape[0]))
        if X.shape[1] != V.shape[1]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {V.shape[1]}")
        d2 = cdist(X, V, metric="sqeuclidean")
        return np.exp(-d2 * self._inv_two_sigma_sq)

    def gram(self, X) -> np.ndarray:
        X = self._as_matrix(X)
        if X.shape[0] == 0:
            raise ValueError("gram requires a nonempty instance sequence")
        K = self.pairwise(X, X)
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
        return K


class PrecomputedKernel:
    """Kernel given by a fixed symmetric PSD matrix; instances are row indices.

    The declared value bounds default to the extremes of the diagonal, the
    only entries the budget analysis constrains.
    """

    kind = "precomputed"

    def __init__(self, matrix, lower_bound: float | None = None,
                 upper_bound: float | None = None):
        M = np.asarray(matrix, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"matrix must be square, got shape {M.shape}")
        asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
        scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
        if asym > 1e-8 * scale:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:g})")
        self.matrix = 0.5 * (M + M.T)
        d = np.diag(self.matrix)
        self.lower_bound = float(d.min()) if lower_bound is None else float(lower_bound)
        self.upper_bound = float(d.max()) if upper_bound is None else float(upper_bound)
        if not 0 < self.lower_bound <= self.upper_bound:
            raise ValueError(
                f"need 0 < lower_bound <= upper_bound, got "
                f"[{self.lower_bound}, {self.upper_bound}]")

    def __repr__(self):
        return (f"PrecomputedKernel(n={self.matrix.shape[0]}, "
                f"bounds=[{self.lower_bound:g}, {self.upper_bound:g}])")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def _as_indices(self, X) -> np.ndarray:
        idx = np.asarray(X)
        if idx.ndim == 2 and idx.shape[1] == 1:
            idx = idx.ravel()
        idx = idx.astype(np.intp, casting="unsafe")
        if idx.size and (idx.min() < 0 or idx.max() >= self.size):
            raise IndexError(
                f"instance index out of range [0, {self.size}): "
                f"[{idx.min()}, {idx.max()}]")
        return idx

    def _index(self, x) -> int:
        i = int(np.asarray(x).ravel()[0])
        if not 0 <= i < self.size:
            raise IndexError(f"instance index {i} out of range [0, {self.size})")
        return i

    def __call__(self, x, v) -> float:
        return float(self.matrix[self._index(x), self._index(v)])

    def diag(self, x) -> float:
        i = self._index(x)
        return float(self.matrix[i, i])

    def cross(self, X, v) -> np.ndarray:
        idx = self._as_indices(X)
        if idx.size == 0:
            return np.zeros(0)
        return self.matrix[idx, self._index(v)]

    def pairwise(self, X, V) -> np.ndarray:
        xi = self._as_indices(X)
        vi = self._as_indices(V)
        return self.matrix[np.ix_(xi, vi)]

    def gram(self, X) -> np.ndarray:
        idx = self._as_indices(X)
        if idx.size == 0:
            raise ValueError("gram requires a nonempty instance sequence")
        return self.matrix[np.ix_(idx, idx)]


class CountingKernel:
    """Instrumentation wrapper counting pairwise kernel evaluations.

    Diagonal values are O(1) lookups (constant 1 for Gaussian) and are not
    counted; ``pair_evals`` tracks the d-dependent work the per-round cost
    claims are about.
    """

    def __init__(self, base):
        self.base = base
        self.pair_evals = 0

    @property
    def kind(self):
        return self.base.kind

    @property
    def lower_bound(self):
        return self.base.lower_bound

    @property
    def upper_bound(self):
        return self.base.upper_bound

    def reset(self):
        self.pair_evals = 0

    def __call__(self, x, v):
        self.pair_evals += 1
        return self.base(x, v)

    def diag(self, x):
        return self.base.diag(x)

    def cross(self, X, v):
        out = self.base.cross(X, v)
        self.pair_evals += out.shape[0]
        return out

    def pairwise(self, X, V):
        out = self.base.pairwise(X, V)
        self.pair_evals += out.size
        return out

    def gram(self, X):
        out = self.base.gram(X)
        self.pair_evals += out.size
        return out


def eigenvalues(gram: np.ndarray, upper_bound: float = 1.0) -> np.ndarray:
    """All eigenvalues of a symmetric PSD matrix, sorted descending.

    Checks symmetry and the PSD floor (eigenvalues >= -1e-8 * n * D);
    dense solve only, capped at n = 5000.
    """
    G = np.asarray(gram, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    n = G.shape[0]
    if n > _EIG_SIZE_CAP:
        raise ValueError(f"dense eigensolve capped at n={_EIG_SIZE_CAP}, got {n}")
    scale = max(1.0, float(np.max(np.abs(G))))
    asym = float(np.max(np.abs(G - G.T)))
    if asym > 1e-8 * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:g})")
    vals = np.linalg.eigvalsh(0.5 * (G + G.T))[::-1]
    floor = -PSD_SLACK * n * upper_bound
    if vals[-1] < floor:
        raise ValueError(
            f"matrix is not PSD within tolerance: min eigenvalue {vals[-1]:g} "
            f"< {floor:g}")
    return vals


@dataclass(frozen=True)
class SpectrumProfile:
    """Prescribed eigenvalue decay: exponential R0*r^i or polynomial R0*i^-p.

    Indexing starts at i = 1, so the leading eigenvalue is R0*r (exponential)
    or R0 (polynomial).
    """

    decay: str
    R0: float
    rate: float

    def __post_init__(self):
        if self.decay not in ("exponential", "polynomial"):
            raise ValueError(f"unknown decay kind {self.decay!r}")
        if not self.R0 > 0:
            raise ValueError(f"R0 must be positive, got {self.R0}")
        if self.decay == "exponential" and not 0 < self.rate < 1:
            raise ValueError(f"exponential rate must lie in (0,1), got {self.rate}")
        if self.decay == "polynomial" and not self.rate >= 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.rate}")

    def eigenvalue_sequence(self, n: int) -> np.ndarray:
        i = np.arange(1, n + 1, dtype=np.float64)
        if self.decay == "exponential":
            return self.R0 * self.rate ** i
        return self.R0 * i ** (-self.rate)


def synthesize_psd(profile: SpectrumProfile, n: int, seed: int) -> np.ndarray:
    """Symmetric PSD matrix Q diag(lam) Q^T with the profile's exact spectrum.

    Q is a seeded Haar-random orthogonal matrix, so the output is
    reproducible and its eigenvalues match the profile up to solver
    round-off.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lam = profile.eigenvalue_sequence(n)
    if n == 1:
        return np.array([[lam[0]]])
    Q = ortho_group.rvs(dim=n, random_state=seed)
    K = (Q * lam) @ Q.T
    return 0.5 * (K + K.T)
