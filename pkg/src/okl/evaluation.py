"""Metrics and bound checkers.

Covers the kernel-alignment statistic, the clipped-gap sum inequality, the
budget-size bound harness for prescribed spectra, numeric regret-bound
values, and online-to-batch risk estimation. Alignment is an O(T^2) pass
computed in row blocks and never runs inside the learner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .budget import BudgetSet
from .kernels import PrecomputedKernel, SpectrumProfile, synthesize_psd
from .learner import PomdrConfig
from .optimism import OptimismWindow, gradient_gap_exact

__all__ = ["RunReport", "BoundReport", "kernel_alignment", "gap_sum_bound_check",
           "budget_bound_harness", "budget_size_bound", "regret_bound_values",
           "online_to_batch"]


@dataclass
class RunReport:
    """Results of one online pass, plus the resolved configuration."""

    algo: str
    dataset: str
    horizon: int
    mistakes: int
    amr: float
    cumulative_loss: float
    exact_gap_sum: float
    budget_trace: list
    t_bar: int | None
    restart_times: list
    wall_time_seconds: float
    config: dict = field(default_factory=dict)
    alignment: float | None = None
    seed: int = 0
    perm: int = 0

    def learning_payload(self) -> dict:
        """Deterministic report content (timing excluded)."""
        return {
            "schema": "okl-report/1",
            "algo": self.algo,
            "dataset": self.dataset,
            "horizon": self.horizon,
            "mistakes": self.mistakes,
            "amr": self.amr,
            "cumulative_loss": self.cumulative_loss,
            "exact_gap_sum": self.exact_gap_sum,
            "budget_trace": [list(p) for p in self.budget_trace],
            "t_bar": self.t_bar,
            "restart_times": list(self.restart_times),
            "alignment": self.alignment,
            "seed": self.seed,
            "perm": self.perm,
            "config": self.config,
        }


@dataclass
class BoundReport:
    """An empirical value against its theoretical bound."""

    empirical_value: float
    bound_value: float
    satisfied: bool
    slack: float
    detail: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, empirical: float, bound: float, **detail) -> "BoundReport":
        return cls(empirical_value=float(empirical), bound_value=float(bound),
                   satisfied=bool(empirical <= bound + 1e-9),
                   slack=float(bound - empirical), detail=detail)


def kernel_alignment(dataset, kernel, chunk: int = 1024) -> float:
    """sum_t kappa(x_t, x_t) - (1/T) y^T K y, computed in row blocks.

    Permutation-invariant; the full kernel matrix is never materialized.
    """
    X = dataset.features
    y = dataset.labels.astype(np.float64)
    T = X.shape[0]
    if chunk < 1:
        raise ValueError(f"chunk must be >= 1, got {chunk}")
    diag_sum = 0.0
    quad = 0.0
    for start in range(0, T, chunk):
        stop = min(start + chunk, T)
        block = kernel.pairwise(X[start:stop], X)
        quad += float(y[start:stop] @ (block @ y))
        diag_sum += float(np.trace(block[:, start:stop]))
    return diag_sum - quad / T


def gap_sum_bound_check(dataset, kernel, window_size: int,
                        chunk: int = 1024) -> BoundReport:
    """Clipped optimism-gap sum against 4 * alignment + 7 * D.

    The gap uses the exact hinge gradient on every round; the window is fed
    every example in stream order.
    """
    window = OptimismWindow(window_size)
    precomputed = kernel.kind == "precomputed"
    total = 0.0
    for i in range(len(dataset)):
        x = dataset.features[i]
        yi = int(dataset.labels[i])
        rec = gradient_gap_exact(window, kernel, x, yi)
        total += rec.delta
        window.push(x, yi, precomputed=precomputed)
    alignment = kernel_alignment(dataset, kernel, chunk=chunk)
    bound = 4.0 * alignment + 7.0 * kernel.upper_bound
    return BoundReport.compare(total, bound, alignment=alignment,
                               window=window_size, horizon=len(dataset))


def budget_size_bound(profile: SpectrumProfile, alpha: float,
                      lower_bound: float, upper_bound: float) -> float:
    """Budget-size bound for ALD-gated insertion under the given spectrum.

    Exponential decay: 2 ln(R0 / alpha) / ln(1/r) + 2 (valid when
    R0 >= the kernel's diagonal lower bound). Polynomial decay:
    e * ((D/A) * R0 / alpha)^(1/p) + 1. Budget sizes are nonnegative
    counts, so the bound is floored at zero (thresholds far above the
    diagonal make the formula vacuous).
    """
    if profile.decay == "exponential":
        if profile.R0 < lower_bound:
            raise ValueError(
                f"bound constant requires R0 >= A, got R0={profile.R0} < "
                f"A={lower_bound}")
        raw = 2.0 * math.log(profile.R0 / alpha) / math.log(1.0 / profile.rate) + 2.0
        return max(raw, 0.0)
    ratio = (upper_bound / lower_bound) * profile.R0 / alpha
    return math.e * ratio ** (1.0 / profile.rate) + 1.0


def budget_bound_harness(profile: SpectrumProfile, n: int,
                         alpha: float | None = None, seed: int = 0,
                         zeta: float = 1.0) -> BoundReport:
    """Run ALD-gated insertion over a synthesized spectrum and check the bound.

    All ``n`` row-instances stream in index order; a point is inserted
    whenever its projection error exceeds ``alpha`` (threshold sqrt(alpha)).
    When ``alpha`` is omitted it resolves to D * n^(-2 zeta) with D the
    synthesized matrix's diagonal maximum.
    """
    K = synthesize_psd(profile, n, seed)
    kernel = PrecomputedKernel(K)
    if alpha is None:
        alpha = kernel.upper_bound * float(n) ** (-2.0 * zeta)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    threshold = math.sqrt(alpha)
    budget = BudgetSet(kernel, capacity=n, tracked=True)
    for i in range(n):
        result = budget.ald_check(i, threshold)
        if not result.holds:
            budget.insert_tracked(i, 1, result)
    bound = budget_size_bound(profile, alpha, kernel.lower_bound,
                              kernel.upper_bound)
    return BoundReport.compare(len(budget), bound, profile=profile.decay,
                               rate=profile.rate, R0=profile.R0, n=n,
                               alpha=alpha,
                               lower_bound=kernel.lower_bound,
                               upper_bound=kernel.upper_bound, seed=seed)


def regret_bound_values(report: RunReport, cfg: PomdrConfig,
                        alignment: float, upper_bound: float = 1.0
                        ) -> dict[str, BoundReport]:
    """Numeric values of the alignment regret bounds (informational).

    The exact-phase bound is 6 U sqrt(A_T + 2D) + 9U; the removal variant
    adds 6 U sqrt(2 T (A_T + 2D)) / sqrt(B). The empirical side is
    cumulative loss minus the zero hypothesis's loss (= T), a competitor
    proxy rather than the true regret.
    """
    U = cfg.radius
    D = upper_bound
    core = 6.0 * U * math.sqrt(alignment + 2.0 * D) + 9.0 * U
    extra = 6.0 * U * math.sqrt(2.0 * cfg.horizon * (alignment + 2.0 * D)) \
        / math.sqrt(cfg.budget)
    proxy = report.cumulative_loss - report.horizon
    return {
        "single_phase": BoundReport.compare(proxy, core, alignment=alignment),
        "with_removal": BoundReport.compare(proxy, core + extra,
                                            alignment=alignment),
    }


def online_to_batch(learner_factory, train, test, r_seed: int) -> dict:
    """Pick a uniformly random round r, replay the learner to it, test f_r.

    ``learner_factory`` builds a fresh learner for the training stream; the
    snapshot after r - 1 rounds is the hypothesis the learner would have
    used to predict round r. Returns mean hinge risk and 0-1 error on the
    held-out set.
    """
    T = len(train)
    r = int(np.random.default_rng(r_seed).integers(1, T + 1))
    learner = learner_factory()
    for i in range(r - 1):
        learner.step(train.features[i], int(train.labels[i]))
    snap = learner.snapshot()
    values = snap.decision_function(test.features)
    y = test.labels.astype(np.float64)
    hinge = np.maximum(0.0, 1.0 - y * values)
    errors = np.where(values >= 0.0, 1, -1) != test.labels
    return {
        "r": r,
        "test_hinge_risk": float(hinge.mean()),
        "test_error_rate": float(errors.mean()),
    }
