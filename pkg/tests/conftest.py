import math

import numpy as np
import pytest

from src.analytic import inviscid_b1, trivial_solution
from src.model import (Case, Component, Mesh, Profile, VortexParams, continuity_G_from_F,
                       continuity_g_from_f)
from src.solvers.inviscid import solve_inviscid
from src.utils.stacks import DerivativeStack

C1_LIMIT = 4.0 * math.sqrt(2.0)


@pytest.fixture
def mesh_1000():
    return Mesh(1000)


@pytest.fixture
def b1_profile():
    return inviscid_b1(C1_LIMIT, 1.0)


@pytest.fixture
def trivial_b1():
    return trivial_solution(VortexParams(b=1.0, nu=0.0, C_omega=1.0))


def guess_profile(b: float) -> Profile:
    """(f0, Ω0) als Kleinbuchstaben-Profil mit g aus der Kontinuität"""
    scale = 2.0 ** ((1.0 - b) / 2.0)
    f = Component(lambda x: DerivativeStack.power_of_quadratic(x, 0.0, 1.0, -1.0, (2.0 - b) / 2.0) * scale,
                  name='f')

    def omega(x):
        upper = (DerivativeStack.power_of_quadratic(x, 0.0, 1.0, 0.0, (1.0 - b) / 2.0)
                 * DerivativeStack.power_of_quadratic(x, 1.0, 1.0, 0.0, -(1.0 - b) / 2.0) * scale)
        return upper * DerivativeStack.power_of_quadratic(x, 1.0, 0.0, -1.0, (1.0 - b) / 2.0)

    return Profile(Case.LOWER, VortexParams(b=b), f, continuity_g_from_f(f, b),
                   Component(omega, name='omega'))


def polynomial_profile(b: float) -> Profile:
    """F = x^2 (1-x), G aus der Kontinuität, Ω = x (1+x)"""
    F = Component(lambda x: DerivativeStack.polynomial(x, (0.0, 0.0, 1.0, -1.0)), name='F')
    omega = Component(lambda x: DerivativeStack.polynomial(x, (0.0, 1.0, 1.0)), name='Omega')
    return Profile(Case.UPPER, VortexParams(b=b), F, continuity_G_from_F(F, b), omega)


@pytest.fixture(scope='session')
def inviscid_solution():
    """b = 0.6, c = 0.25, h = 1e-3"""
    mesh = Mesh.from_step(1e-3)
    profile, solution = solve_inviscid(0.6, 0.25, mesh)
    return profile, solution, mesh


@pytest.fixture
def nodes_100():
    return Mesh(100).interior


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
