"""Adaptive Levenberg-Marquardt third-order Newton method."""

from ._core import (
    audit,
    check_derivatives,
    evaluate,
    minimize_cubic,
    performance_profile,
    problem_info,
    problem_names,
    setting_keys,
    solve,
    solver_ids,
)

__all__ = [
    "audit",
    "check_derivatives",
    "evaluate",
    "minimize_cubic",
    "performance_profile",
    "problem_info",
    "problem_names",
    "setting_keys",
    "solve",
    "solver_ids",
]
