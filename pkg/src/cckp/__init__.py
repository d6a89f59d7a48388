"""Solvers and benchmark harness for the cardinality-constrained
continuous knapsack problem with concave piecewise-linear utilities."""

from .model import (
    TOL,
    Component,
    Instance,
    Item,
    Solution,
    SolutionStats,
    canonicalize,
    eval_utility,
    load_instance,
    objective,
    save_instance,
    validate_instance,
)
from .errors import ResourceLimitError, ValidationError

__version__ = "0.1.0"
