"""
Utilities Package
"""

from .finite_differences import FiniteDifferences, differentiation_matrix
from .stacks import DerivativeStack, one_minus_x2
from .specfun import (
    HyperParams,
    pochhammer,
    ln_gamma,
    gauss_2f1,
    gauss_2f1_at_one
)

__all__ = [
    'FiniteDifferences',
    'differentiation_matrix',
    'DerivativeStack',
    'one_minus_x2',
    'HyperParams',
    'pochhammer',
    'ln_gamma',
    'gauss_2f1',
    'gauss_2f1_at_one'
]
