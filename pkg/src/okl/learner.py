"""The two-phase budgeted online learner.

Phase one runs projected optimistic mirror descent with ALD-gated budget
growth and an incrementally tracked inverse Gram. Once the budget reaches
the switch size the learner converts to an append-only budget and, whenever
it fills, halves it by dropping the newest half and folding coefficients
onto nearest kept members, resetting the adaptive learning rate.

All per-round kernel evaluations are the member cross vector and the window
cross vector; every later quantity in the round (ALD solve, update, gap
record, window cache maintenance) reuses those two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budget import BudgetSet
from .expansion import KernelExpansion
from .optimism import OptimismWindow, gradient_gap_approx, gradient_gap_exact

__all__ = ["PomdrConfig", "RoundOutcome", "POMDRLearner", "HypothesisSnapshot",
           "auto_switch_budget"]

PHASE_POMD = "pomd"
PHASE_OMDR = "omdr"

# Learning-rate reset constants: the first phase starts its accumulator at 3;
# removal segments use 4 D, an a-priori upper bound on every gap value.
POMD_EPSILON = 3.0


def auto_switch_budget(horizon: int) -> int:
    """Default switch size ceil(15 ln T)."""
    return int(math.ceil(15.0 * math.log(horizon)))


@dataclass(frozen=True)
class PomdrConfig:
    """Run parameters for :class:`POMDRLearner`.

    ``switch_budget=None`` resolves to ceil(15 ln horizon). The ALD
    threshold is ``ald_scale * horizon**(-zeta)``.
    """

    horizon: int
    radius: float = 25.0
    zeta: float = 2.0 / 3.0
    budget: int = 400
    switch_budget: int | None = None
    window: int = 15
    lr_scale: float = 0.1
    ald_scale: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not 0 < self.zeta <= 1:
            raise ValueError(f"zeta must lie in (0, 1], got {self.zeta}")
        if self.budget < 2 or self.budget % 2 != 0:
            raise ValueError(f"budget must be a positive even count, got {self.budget}")
        if self.resolved_switch_budget >= self.budget:
            raise ValueError(
                f"switch budget {self.resolved_switch_budget} must be smaller "
                f"than budget {self.budget}")
        if self.resolved_switch_budget < 1:
            raise ValueError("switch budget must be >= 1")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not self.lr_scale > 0:
            raise ValueError(f"lr_scale must be positive, got {self.lr_scale}")
        if not self.ald_scale > 0:
            raise ValueError(f"ald_scale must be positive, got {self.ald_scale}")

    @property
    def resolved_switch_budget(self) -> int:
        if self.switch_budget is None:
            return auto_switch_budget(self.horizon)
        return int(self.switch_budget)

    @property
    def ald_threshold(self) -> float:
        return self.ald_scale * self.horizon ** (-self.zeta)


@dataclass(frozen=True)
class RoundOutcome:
    prediction: int
    hinge_loss: float
    updated: bool
    delta: float
    phase_event: str | None = None
    margin: float = 0.0


@dataclass(frozen=True)
class HypothesisSnapshot:
    """Frozen copy of the prediction-time hypothesis after some round.

    Evaluates the expansion over the captured budget members plus the
    optimistic window term with the captured learning rate, i.e. exactly
    what the learner would use to predict its next instance.
    """

    kernel: object
    members: np.ndarray
    coefficients: np.ndarray
    window_instances: np.ndarray
    window_labels: np.ndarray
    learning_rate: float

    def evaluate(self, x) -> float:
        val = 0.0
        if self.members.shape[0]:
            val += float(self.coefficients @ self.kernel.cross(self.members, x))
        m = self.window_instances.shape[0]
        if m:
            k = self.kernel.cross(self.window_instances, x)
            val += self.learning_rate * float(self.window_labels @ k) / m
        return val

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X)
        out = np.zeros(X.shape[0])
        if self.members.shape[0]:
            out += self.kernel.pairwise(X, self.members) @ self.coefficients
        m = self.window_instances.shape[0]
        if m:
            K = self.kernel.pairwise(X, self.window_instances)
            out += self.learning_rate * (K @ self.window_labels) / m
        return out

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


class POMDRLearner:
    """Round-by-round driver of the two-phase algorithm."""

    def __init__(self, kernel, config: PomdrConfig):
        self.kernel = kernel
        self.config = config
        self.switch_budget = config.resolved_switch_budget
        self.threshold = config.ald_threshold
        cap = config.budget
        self.budget = BudgetSet(kernel, capacity=cap, tracked=True)
        self.expansion = KernelExpansion(radius=config.radius, capacity=cap)
        self.window = OptimismWindow(config.window)
        # Cross cache: row per window slot, column per budget member. Filled
        # exclusively from vectors the round already computed.
        self._window_cross = np.zeros((config.window, cap))
        self.phase = PHASE_POMD
        self.delta_sum = 0.0
        self.epsilon = POMD_EPSILON
        self.t = 0
        self.t_bar: int | None = None
        self.restart_times: list[int] = []
        self.mistakes = 0
        self.cumulative_loss = 0.0
        self.exact_gap_total = 0.0
        self.budget_trace: list[tuple[int, int]] = []

    @property
    def learning_rate(self) -> float:
        c = self.config.lr_scale
        return c * self.config.radius / math.sqrt(self.epsilon + self.delta_sum)

    def step(self, x, y: int) -> RoundOutcome:
        """Run one full round: predict on x, observe y, update."""
        cfg = self.config
        if self.t >= cfg.horizon:
            raise RuntimeError(f"horizon {cfg.horizon} exhausted")
        if y not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {y!r}")
        rnd = self.t + 1
        lam = self.learning_rate
        kernel = self.kernel

        k_s = self.budget.cross(x)
        value = float(self.expansion.coefficients @ k_s) if k_s.shape[0] else 0.0
        c_win = self.window.cross(kernel, x)
        opt = self.window.value_at(kernel, x, cross=c_win)
        margin = value + lam * opt
        prediction = 1 if margin >= 0.0 else -1
        hinge_loss = max(0.0, 1.0 - y * margin)
        kxx = kernel.diag(x)

        raw_exact = kxx - 2.0 * y * opt
        self.exact_gap_total += max(raw_exact, 0.0)

        delta = 0.0
        updated = False
        event = None
        inserted = False
        halved = False

        if hinge_loss > 0.0:
            updated = True
            if self.phase == PHASE_POMD:
                ald = self.budget.ald_check(x, self.threshold, cross=k_s)
                if ald.holds:
                    quad = float(ald.beta @ k_s) if k_s.shape[0] else 0.0
                    rec = gradient_gap_approx(
                        self.window, kernel, self.budget, ald.beta, y,
                        quad=quad, cross_matrix=self._window_cross)
                    self.expansion.step_approx(self.budget, y, lam, ald.beta,
                                               cross=k_s)
                else:
                    self.budget.insert_tracked(x, y, ald, arrival=rnd)
                    inserted = True
                    m_new = len(self.budget)
                    mw = len(self.window)
                    if mw:
                        self._window_cross[:mw, m_new - 1] = c_win
                    self.expansion.extend()
                    self.expansion.step_exact(self.budget, y, lam,
                                              value_at_x=value, self_sim=kxx)
                    rec = gradient_gap_exact(self.window, kernel, x, y, value=opt)
                    if m_new == self.switch_budget:
                        self.t_bar = rnd + 1
                        self.phase = PHASE_OMDR
                        self.budget.to_plain()
                        self.delta_sum = 0.0
                        self.epsilon = 4.0 * kernel.upper_bound
                        event = "switched"
                delta = rec.delta
            else:
                self.budget.insert_plain(x, y, arrival=rnd)
                inserted = True
                m_new = len(self.budget)
                mw = len(self.window)
                if mw:
                    self._window_cross[:mw, m_new - 1] = c_win
                self.expansion.extend()
                self.expansion.step_exact(self.budget, y, lam,
                                          value_at_x=value, self_sim=kxx)
                rec = gradient_gap_exact(self.window, kernel, x, y, value=opt)
                delta = rec.delta
                if m_new == cfg.budget:
                    self.expansion.halve_and_redistribute(self.budget)
                    halved = True
                    self.restart_times.append(rnd + 1)
                    self.delta_sum = 0.0
                    event = "halved"

        slot = self.window.push(x, y, precomputed=kernel.kind == "precomputed")
        m_now = len(self.budget)
        if halved:
            self._window_cross[slot, :m_now] = k_s[:m_now]
        elif inserted:
            self._window_cross[slot, : m_now - 1] = k_s
            self._window_cross[slot, m_now - 1] = kxx
        else:
            self._window_cross[slot, :m_now] = k_s

        self.delta_sum += delta
        self.t += 1
        self.cumulative_loss += hinge_loss
        if prediction != y:
            self.mistakes += 1
        if not self.budget_trace or self.budget_trace[-1][1] != m_now:
            self.budget_trace.append((self.t, m_now))
        return RoundOutcome(prediction, hinge_loss, updated, delta, event, margin)

    def run(self, X, y) -> list[RoundOutcome]:
        """Convenience driver over a whole stream."""
        return [self.step(xi, int(yi)) for xi, yi in zip(np.asarray(X), np.asarray(y))]

    def snapshot(self) -> HypothesisSnapshot:
        """Immutable copy of the hypothesis used to predict the next round."""
        return HypothesisSnapshot(
            kernel=self.kernel,
            members=np.array(self.budget.instances, copy=True),
            coefficients=np.array(self.expansion.coefficients, copy=True),
            window_instances=np.array(self.window.instances, copy=True),
            window_labels=np.array(self.window.labels, copy=True),
            learning_rate=self.learning_rate,
        )

    def decision_function(self, X) -> np.ndarray:
        """Value of the current regularized hypothesis (expansion only)."""
        X = np.asarray(X)
        if len(self.budget) == 0:
            return np.zeros(X.shape[0])
        K = self.kernel.pairwise(X, self.budget.instances)
        return K @ self.expansion.coefficients

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)
