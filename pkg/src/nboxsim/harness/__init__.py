"""Experiment files, exact runner, Monte Carlo sampler, reports and the command line."""

from .experiment import ExperimentSpec, parse_experiment, experiment_from_dict  # noqa: F401
from .montecarlo import TrialRecord, estimate_conditional, rng_stream, run_trials, sample_trajectory  # noqa: F401
from .report import Report, emit_report, parse_report  # noqa: F401
from .runner import run_experiment  # noqa: F401
