"""Diffusive nested sampling.

Evidence estimation and posterior sampling by MCMC exploration of a
weighted mixture of nested constrained-prior distributions, with a classic
nested sampling baseline and a benchmarking harness.
"""

__version__ = "0.1.0"

from .model import LikelihoodValue, Model
from .levels import Level, LevelSet, LikelihoodBuffer
from .explorer import (
    DiffusiveSampler,
    ParticleState,
    RunConfig,
    RunResult,
    enforce_factor,
    level_weights,
)
from .postprocess import (
    SampleRecord,
    XAssignment,
    assign_x,
    effective_sample_size,
    evidence_error_bar,
    information,
    log_evidence,
    posterior_weights,
    resample_posterior,
)
from .classic import ClassicConfig, ClassicResult, run_classic
from .problems import AnalyticGaussian, TwinGaussian, make_problem
from .bench import BenchPlan, MethodSpec, default_plan, rms_error, run_bench

__all__ = [
    "__version__",
    "LikelihoodValue",
    "Model",
    "Level",
    "LevelSet",
    "LikelihoodBuffer",
    "DiffusiveSampler",
    "ParticleState",
    "RunConfig",
    "RunResult",
    "enforce_factor",
    "level_weights",
    "SampleRecord",
    "XAssignment",
    "assign_x",
    "effective_sample_size",
    "evidence_error_bar",
    "information",
    "log_evidence",
    "posterior_weights",
    "resample_posterior",
    "ClassicConfig",
    "ClassicResult",
    "run_classic",
    "AnalyticGaussian",
    "TwinGaussian",
    "make_problem",
    "BenchPlan",
    "MethodSpec",
    "default_plan",
    "rms_error",
    "run_bench",
]
