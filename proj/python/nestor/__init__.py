"""Multilevel Monte Carlo estimators for repeatedly nested expectations.

Thin Python layer over the C++ core; see the function docstrings on the
re-exported names.
"""

from ._nestor import (
    ParameterError,
    ScheduleInfeasibleError,
    derand_cost,
    estimate,
    fit_slope,
    list_problems,
    problem_truth,
    qamc_eps_delta_charge,
    qamc_rmse_charge,
    qmlmc_charge,
    replication_count,
    run_study,
    solve_rate,
    truncation_level,
)

__all__ = [
    "ParameterError",
    "ScheduleInfeasibleError",
    "derand_cost",
    "estimate",
    "fit_slope",
    "list_problems",
    "problem_truth",
    "qamc_eps_delta_charge",
    "qamc_rmse_charge",
    "qmlmc_charge",
    "replication_count",
    "run_study",
    "solve_rate",
    "truncation_level",
]
