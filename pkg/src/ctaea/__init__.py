"""Two-archive evolutionary optimisation for constrained multi-objective problems.

The convergence archive pushes toward the feasible front; the diversity
archive ignores constraints and explores what the first one leaves thin.
"""

from .baseline import BaselineConfig, run_baseline
from .bench import ExperimentConfig, emit_scatter, run_experiment
from .core import Archive, InvalidConfigError, InvalidInputError, Solution, UnsupportedProblemError, make_rng
from .decomposition import WeightVectorSet, generate_weights
from .metrics import MetricReport, hypervolume, igd, wilcoxon_rank_sum
from .optimizer import CtaeaConfig, CtaeaState, run
from .problems import Problem, ReferenceFront, make_problem, sample_reference_front
from .record import RunRecord
from .variation import VariationParams

__all__ = [
    "Archive", "BaselineConfig", "CtaeaConfig", "CtaeaState", "ExperimentConfig", "InvalidConfigError",
    "InvalidInputError", "MetricReport", "Problem", "ReferenceFront", "RunRecord", "Solution",
    "UnsupportedProblemError", "VariationParams", "WeightVectorSet", "emit_scatter", "generate_weights",
    "hypervolume", "igd", "make_problem", "make_rng", "run", "run_baseline", "run_experiment",
    "sample_reference_front", "wilcoxon_rank_sum",
]
