"""
Solvers Package
"""

from .base_solver import BaseSolver, NewtonResult
from .inviscid import (
    InviscidProblem,
    InviscidSolver,
    PSolution,
    SweepEntry,
    initial_guess,
    recover_profile,
    profile_from_p,
    solve_inviscid,
    sweep_b,
    sweep_c,
    feasibility_survey
)
from .viscous import (
    ViscousProblem,
    ViscousSolver,
    LayerMeasurement,
    solve_serrin_b1,
    calibrate_closure,
    layer_size,
    layer_scaling,
    fit_layer_slope,
    delta_sensitivity,
    check_nu_list
)

__all__ = [
    'BaseSolver',
    'NewtonResult',
    'InviscidProblem',
    'InviscidSolver',
    'PSolution',
    'SweepEntry',
    'initial_guess',
    'recover_profile',
    'profile_from_p',
    'solve_inviscid',
    'sweep_b',
    'sweep_c',
    'feasibility_survey',
    'ViscousProblem',
    'ViscousSolver',
    'LayerMeasurement',
    'solve_serrin_b1',
    'calibrate_closure',
    'layer_size',
    'layer_scaling',
    'fit_layer_slope',
    'delta_sensitivity',
    'check_nu_list'
]
