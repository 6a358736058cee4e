"""
Multi-task regression solvers
"""
from mtfl.solvers.fista import fista, lipschitz_constant
from mtfl.solvers.models import fit_fsgl, fit_lasso, fit_model, fit_ridge
from mtfl.solvers.penalties import (
    forward_difference,
    fsgl_objective,
    lasso_kkt_residual,
    objective,
)
from mtfl.solvers.prox import (
    prox_flsa,
    prox_fsgl,
    prox_fsgl_row,
    prox_group_l2,
    prox_l1,
)

__all__ = [
    'fista',
    'fit_fsgl',
    'fit_lasso',
    'fit_model',
    'fit_ridge',
    'forward_difference',
    'fsgl_objective',
    'lasso_kkt_residual',
    'lipschitz_constant',
    'objective',
    'prox_flsa',
    'prox_fsgl',
    'prox_fsgl_row',
    'prox_group_l2',
    'prox_l1',
]
