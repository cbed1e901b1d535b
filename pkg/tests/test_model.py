import math

import numpy as np
import pytest

from src.analytic import trivial_solution
from src.exceptions import SingularPointError, ValidationError
from src.model import (Case, Component, Kind, Mesh, Profile, VortexParams, as_lower, as_upper,
                       continuity_G_from_F, continuity_g_from_f, flux_integral, profile_flux, sample_profile,
                       sampled_profile, stream_function, to_lowercase, to_uppercase,
                       x_from_cylindrical)
from src.utils.stacks import DerivativeStack
from tests.conftest import C1_LIMIT, polynomial_profile


def test_vortex_params_validation():
    with pytest.raises(ValidationError):
        VortexParams(b=0.0)
    with pytest.raises(ValidationError):
        VortexParams(b=0.5, nu=-1.0)
    with pytest.raises(ValidationError):
        VortexParams(b=0.5, C_omega=0.0)
    params = VortexParams(b=0.6)
    assert params.kappa == pytest.approx(1 / 1.4)
    assert params.q == pytest.approx(0.4 / 1.4)


def test_mesh_construction():
    mesh = Mesh.from_step(1e-3)
    assert mesh.n == 1000
    assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 1.0
    assert mesh.interior.size == 999
    assert Mesh.with_max_step(0.0125).n == 80
    with pytest.raises(ValidationError):
        Mesh.from_step(0.3)
    with pytest.raises(ValidationError):
        Mesh(5)


def test_trimmed_nodes():
    nodes = Mesh(100).trimmed(0.1)
    assert nodes[0] == pytest.approx(0.1)
    assert nodes[-1] == pytest.approx(0.9)
    assert nodes.size == 81


def test_case_round_trip():
    profile = polynomial_profile(0.6)
    back = to_uppercase(to_lowercase(profile))
    x = Mesh(100).interior
    for original, restored in zip(profile.evaluate(x), back.evaluate(x)):
        np.testing.assert_allclose(restored[0], original[0], rtol=1e-12, atol=1e-12)
    x = Mesh(100).trimmed(0.1)
    for original, restored in zip(profile.evaluate(x), back.evaluate(x)):
        np.testing.assert_allclose(restored.data, original.data, rtol=1e-9, atol=1e-9)


def test_case_conversion_direction_is_checked():
    lower = to_lowercase(polynomial_profile(0.6))
    with pytest.raises(ValidationError):
        to_lowercase(lower)
    assert as_lower(lower) is lower
    assert as_upper(lower).case == Case.UPPER


def test_conversion_is_identity_for_b1(b1_profile):
    x = Mesh(50).interior
    lower = to_lowercase(b1_profile)
    np.testing.assert_allclose(lower.first(x), b1_profile.first(x))


def test_continuity_degenerate_at_b2():
    with pytest.raises(ValidationError):
        continuity_G_from_F(Component.zero(), 2.0)
    with pytest.raises(ValidationError):
        continuity_g_from_f(Component.zero(), 2.0)


def test_continuity_matches_b1_family(b1_profile):
    x = Mesh(100).trimmed(0.05)
    G = continuity_G_from_F(b1_profile.first, 1.0)
    np.testing.assert_allclose(G(x), b1_profile.second(x), rtol=1e-12)


def test_strict_evaluation_accepts_continuity_derived_components():
    profile = polynomial_profile(0.6)
    F, G, O = profile.evaluate([0.5])
    assert G.top == 3
    assert np.isfinite(G[3][0])
    lower = as_lower(profile).evaluate(Mesh(100).interior)
    assert all(stack.is_finite().all() for stack in lower)


def test_flux_vanishes_for_b1_family(b1_profile):
    assert abs(flux_integral(b1_profile.second)) <= 1e-6


def test_flux_vanishes_when_f_vanishes_at_both_ends():
    f = Component(lambda x: DerivativeStack.polynomial(x, (0.0, 1.0, -1.0)), name='f')
    assert abs(flux_integral(continuity_g_from_f(f, 0.5))) <= 1e-8


def test_flux_of_elementary_integrands():
    assert flux_integral(Component.zero()) == 0.0
    identity = Component(lambda x: DerivativeStack.identity(x), name='g')
    assert flux_integral(identity) == pytest.approx(1.0, abs=1e-10)


def test_flux_of_lowered_rigid_rotation_above_b1():
    trivial = trivial_solution(VortexParams(b=1.5, C_omega=1.0))
    assert flux_integral(as_lower(trivial).second) == 0.0
    assert profile_flux(trivial) == 0.0


def test_profile_flux_of_sampled_b1_family(b1_profile):
    mesh = Mesh(200)
    samples = sample_profile(b1_profile, mesh)
    sampled = sampled_profile(b1_profile.params, mesh, samples['F'], samples['G'], samples['Omega'])
    assert abs(profile_flux(sampled)) <= 1e-12
    assert abs(profile_flux(b1_profile)) <= 1e-6


def test_flux_of_sampled_b1_family(b1_profile):
    mesh = Mesh.from_step(1e-3)
    samples = sample_profile(b1_profile, mesh)
    sampled = sampled_profile(b1_profile.params, mesh, samples['F'], samples['G'], samples['Omega'])
    assert sampled.kind == Kind.SAMPLED
    assert abs(flux_integral(sampled.second)) <= 5 * mesh.h ** 0.5


def test_sample_profile_marks_poles(b1_profile):
    samples = sample_profile(b1_profile, Mesh(100))
    assert math.isnan(samples['G'][0])
    assert samples['F'][0] == 0.0
    assert samples['F'][50] == pytest.approx(C1_LIMIT * 0.5)


def test_strict_evaluation_raises_at_pole(b1_profile):
    with pytest.raises(SingularPointError) as info:
        b1_profile.evaluate([0.0, 0.5])
    assert info.value.x == 0.0
    stacks = b1_profile.evaluate([0.0, 0.5], strict=False)
    assert not np.isfinite(stacks[1][0][0])


def test_sampled_component_reproduces_nodes_and_interpolates():
    mesh = Mesh(200)
    values = np.sin(mesh.nodes)
    component = Component.from_samples(mesh, values, 'F')
    np.testing.assert_array_equal(component(mesh.nodes), values)
    assert component(0.1234)[0] == pytest.approx(math.sin(0.1234), abs=1e-8)
    assert component.stack(0.5)[1][0] == pytest.approx(math.cos(0.5), abs=1e-4)
    with pytest.raises(ValidationError):
        Component.from_samples(mesh, values[:-1])


def test_stream_function(b1_profile):
    R, x = 2.0, 0.3
    expected = R * C1_LIMIT * math.sqrt(x * (1 - x))
    assert stream_function(R, x, b1_profile) == pytest.approx(expected)


def test_x_from_cylindrical():
    assert x_from_cylindrical(1.0, 1.0) == pytest.approx(1 / math.sqrt(2))
    assert x_from_cylindrical(1.0, 0.0) == 0.0
    with pytest.raises(SingularPointError):
        x_from_cylindrical(0.0, 0.0)


def test_scaled_profile_keeps_case():
    profile = polynomial_profile(0.6).scaled(2.0)
    assert profile.case == Case.UPPER
    assert profile.first(0.5)[0] == pytest.approx(2 * 0.125)


def test_profile_kind(b1_profile):
    assert b1_profile.kind == Kind.CLOSED_FORM
    assert b1_profile.mesh is None
    assert isinstance(b1_profile, Profile)
