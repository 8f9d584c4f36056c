"""Budgeted online kernel learning with optimistic mirror descent.

The low-level round protocol lives in :mod:`okl.learner` and
:mod:`okl.baselines`; scikit-learn estimator wrappers in
:mod:`okl.estimators`; metrics and bound checkers in :mod:`okl.evaluation`;
the benchmark CLI in :mod:`okl.cli`.
"""

from .baselines import (FOGDLearner, FourierFeatureMap, KernelOGDLearner,
                        NOGDLearner, NystromMap, baseline_stepsize_grid)
from .budget import AldResult, BudgetSet, DegenerateInsertionError
from .data import (DataFormatError, Dataset, LabeledExample, dump_libsvm,
                   load_dataset, minmax_scale, parse_csv, parse_libsvm,
                   train_test_split)
from .estimators import (FOGDClassifier, KernelOGDClassifier, NOGDClassifier,
                         POMDRClassifier)
from .evaluation import (BoundReport, RunReport, budget_bound_harness,
                         budget_size_bound, gap_sum_bound_check,
                         kernel_alignment, online_to_batch,
                         regret_bound_values)
from .expansion import KernelExpansion, redistribute_coefficients
from .kernels import (CountingKernel, GaussianKernel, PrecomputedKernel,
                      SpectrumProfile, eigenvalues, synthesize_psd)
from .learner import (HypothesisSnapshot, POMDRLearner, PomdrConfig,
                      RoundOutcome, auto_switch_budget)
from .optimism import (DeltaRecord, OptimismWindow, gradient_gap_approx,
                       gradient_gap_exact)

__version__ = "0.1.0"

__all__ = [
    "AldResult", "BoundReport", "BudgetSet", "CountingKernel",
    "DataFormatError", "Dataset", "DegenerateInsertionError", "DeltaRecord",
    "FOGDClassifier", "FOGDLearner", "FourierFeatureMap", "GaussianKernel",
    "HypothesisSnapshot", "KernelExpansion", "KernelOGDClassifier",
    "KernelOGDLearner", "LabeledExample", "NOGDClassifier", "NOGDLearner",
    "NystromMap", "OptimismWindow", "POMDRClassifier", "POMDRLearner",
    "PomdrConfig", "PrecomputedKernel", "RoundOutcome", "RunReport",
    "SpectrumProfile", "auto_switch_budget", "baseline_stepsize_grid",
    "budget_bound_harness", "budget_size_bound", "dump_libsvm", "eigenvalues",
    "gap_sum_bound_check", "gradient_gap_approx", "gradient_gap_exact",
    "kernel_alignment", "load_dataset", "minmax_scale", "online_to_batch",
    "parse_csv", "parse_libsvm", "redistribute_coefficients",
    "regret_bound_values", "synthesize_psd", "train_test_split",
]
