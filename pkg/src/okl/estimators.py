"""Scikit-learn estimator wrappers around the online learners.

``fit`` performs a single online pass over (X, y) in row order and records
the progressive statistics (mistakes, cumulative hinge loss, phase events);
``predict``/``decision_function`` use the hypothesis left after the pass.
Labels must already be -1/+1; use the loaders in :mod:`okl.data` to map
other encodings.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .baselines import (FOGDLearner, FourierFeatureMap, KernelOGDLearner,
                        NOGDLearner)
from .kernels import GaussianKernel
from .learner import PomdrConfig, POMDRLearner
from .validation import as_binary_labels, as_feature_matrix, check_paired

__all__ = ["POMDRClassifier", "KernelOGDClassifier", "FOGDClassifier",
           "NOGDClassifier"]


class _OnlineClassifierMixin(ClassifierMixin):
    """Shared fit loop and prediction plumbing."""

    def _check_inputs(self, X, y):
        X = as_feature_matrix(X)
        y = as_binary_labels(y)
        check_paired(X, y)
        return X, y

    def _run(self, learner, X, y):
        outcomes = [learner.step(X[i], int(y[i])) for i in range(X.shape[0])]
        self.learner_ = learner
        self.classes_ = np.array([-1, 1])
        self.n_features_in_ = X.shape[1]
        self.mistakes_ = learner.mistakes
        self.amr_ = learner.mistakes / X.shape[0]
        self.cumulative_loss_ = learner.cumulative_loss
        self.outcomes_ = outcomes
        return self

    def _require_fitted(self):
        if not hasattr(self, "learner_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def decision_function(self, X):
        self._require_fitted()
        return self.learner_.decision_function(as_feature_matrix(X))

    def predict(self, X):
        self._require_fitted()
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


class POMDRClassifier(_OnlineClassifierMixin, BaseEstimator):
    """Budgeted online kernel classifier with optimistic mirror descent.

    Parameters mirror the run configuration: Gaussian bandwidth ``sigma``,
    ALD exponent ``zeta`` and scale ``ald_scale``, removal-phase budget
    ``budget`` (even), phase-switch size ``switch_budget`` (None resolves to
    ceil(15 ln T)), optimism window size ``window``, hypothesis ball radius
    ``radius``, and learning-rate multiplier ``lr_scale``.
    """

    def __init__(self, sigma=2.0, zeta=2.0 / 3.0, budget=400,
                 switch_budget=None, window=15, radius=25.0, lr_scale=0.1,
                 ald_scale=10.0):
        self.sigma = sigma
        self.zeta = zeta
        self.budget = budget
        self.switch_budget = switch_budget
        self.window = window
        self.radius = radius
        self.lr_scale = lr_scale
        self.ald_scale = ald_scale

    def fit(self, X, y):
        X, y = self._check_inputs(X, y)
        cfg = PomdrConfig(horizon=X.shape[0], radius=self.radius,
                          zeta=self.zeta, budget=self.budget,
                          switch_budget=self.switch_budget,
                          window=self.window, lr_scale=self.lr_scale,
                          ald_scale=self.ald_scale)
        learner = POMDRLearner(GaussianKernel(self.sigma), cfg)
        self._run(learner, X, y)
        self.t_bar_ = learner.t_bar
        self.restart_times_ = list(learner.restart_times)
        self.budget_trace_ = list(learner.budget_trace)
        return self


class KernelOGDClassifier(_OnlineClassifierMixin, BaseEstimator):
    """Unbudgeted kernel online gradient descent."""

    def __init__(self, sigma=2.0, eta=0.1, radius=25.0):
        self.sigma = sigma
        self.eta = eta
        self.radius = radius

    def fit(self, X, y):
        X, y = self._check_inputs(X, y)
        learner = KernelOGDLearner(GaussianKernel(self.sigma), eta=self.eta,
                                   radius=self.radius)
        return self._run(learner, X, y)


class FOGDClassifier(_OnlineClassifierMixin, BaseEstimator):
    """Online gradient descent on random Fourier features."""

    def __init__(self, sigma=2.0, n_features=400, eta=0.1, seed=0):
        self.sigma = sigma
        self.n_features = n_features
        self.eta = eta
        self.seed = seed

    def fit(self, X, y):
        X, y = self._check_inputs(X, y)
        fmap = FourierFeatureMap(self.n_features, X.shape[1], self.sigma,
                                 seed=self.seed)
        learner = FOGDLearner(fmap, eta=self.eta)
        return self._run(learner, X, y)


class NOGDClassifier(_OnlineClassifierMixin, BaseEstimator):
    """Online gradient descent on a first-landmarks Nystrom feature map."""

    def __init__(self, sigma=2.0, budget=400, eta=0.1, radius=25.0,
                 rank_fraction=0.2):
        self.sigma = sigma
        self.budget = budget
        self.eta = eta
        self.radius = radius
        self.rank_fraction = rank_fraction

    def fit(self, X, y):
        X, y = self._check_inputs(X, y)
        learner = NOGDLearner(GaussianKernel(self.sigma), budget=self.budget,
                              eta=self.eta, radius=self.radius,
                              rank_fraction=self.rank_fraction)
        return self._run(learner, X, y)
