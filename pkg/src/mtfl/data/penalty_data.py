"""
PenaltyConfig, SolverOptions and SolverReport Classes
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

import mtfl.defaults

MODEL_NAMES = ('ridge', 'lasso', 'fsgl')


@dataclass(frozen=True, kw_only=True)
class PenaltyConfig:
    """
    Regularization strengths for one model fit.

    `lambda1` is the elementwise penalty (squared Frobenius for
    ridge, L1 for lasso and fsgl), `lambda2` the temporal fused
    penalty and `lambda3` the row-wise L2,1 penalty. Ridge and lasso
    read `lambda1` only.
    """
    model: str
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(
                f"`model` must be one of {MODEL_NAMES}, got '{self.model}'"
            )
        for name in ('lambda1', 'lambda2', 'lambda3'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)):
                raise TypeError(f"`{name}` must be of type `int` or `float`")
            if value < 0:
                raise ValueError(f"`{name}` must be non-negative")
            object.__setattr__(self, name, float(value))
        if self.model != 'fsgl' and (self.lambda2 or self.lambda3):
            raise ValueError(
                f"model '{self.model}' only accepts `lambda1`"
            )

    @property
    def total(self) -> float:
        """
        Get the summed penalty strength, used to order grids and
        break cross-validation ties

        :type: float
        """
        return self.lambda1 + self.lambda2 + self.lambda3

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, kw_only=True)
class SolverOptions:
    tol: float = mtfl.defaults.TOL
    max_iter: int = mtfl.defaults.MAX_ITER
    kkt_tol: float = mtfl.defaults.KKT_TOL
    power_iter: int = mtfl.defaults.POWER_ITER
    power_tol: float = mtfl.defaults.POWER_TOL
    backtrack_factor: float = mtfl.defaults.BACKTRACK_FACTOR

    def __post_init__(self):
        if self.tol <= 0 or self.kkt_tol <= 0:
            raise ValueError("solver tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("`max_iter` must be at least 1")
        if self.backtrack_factor <= 1:
            raise ValueError("`backtrack_factor` must be greater than 1")


@dataclass(kw_only=True)
class SolverReport:
    """
    Diagnostics of one fit

    :param objective_trace: Objective value after each iteration
    :type objective_trace: list[float]
    :param step_sizes: Step size used at each iteration
    :type step_sizes: list[float]
    :param iterations: Number of iterations run
    :type iterations: int
    :param converged: Whether the stopping rule was met
    :type converged: bool
    :param kkt_residual: Optimality residual of the returned weights
    :type kkt_residual: float
    """
    objective_trace: List[float] = field(default_factory=list)
    step_sizes: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    kkt_residual: float = float('nan')

    @property
    def objective(self) -> float:
        if self.objective_trace:
            return self.objective_trace[-1]
        return float('nan')
