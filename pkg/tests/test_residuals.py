import numpy as np
import pytest

from src.analytic import flip_swirl, inviscid_b1, pressure_b1, reverse, trivial_solution
from src.exceptions import SingularPointError, ValidationError
from src.model import Case, Mesh, VortexParams
from src.residuals import (EquationId, GoverningMode, ResidualReport, continuity_residuals,
                           eval_C, eval_composites, eval_D, eval_substituted, euler_b2_residuals,
                           euler_residuals, fullfield_ns_residual, governing_residuals,
                           ns_residuals, pressure_from_profile, reports_to_frame,
                           serrin_residuals, viscous_b2_residuals)
from tests.conftest import guess_profile, polynomial_profile


def test_b1_family_satisfies_reduced_euler(b1_profile):
    mesh = Mesh(1000)
    for report in euler_residuals(b1_profile, mesh):
        assert report.relative_sup <= 1e-9
        assert report.restricted(0.1, 0.9).sup_norm <= 1e-9


def test_b1_family_satisfies_continuity(b1_profile):
    report = continuity_residuals(b1_profile, Mesh(200))
    assert report.equation_id == EquationId.CONTINUITY
    assert report.relative_sup <= 1e-12


def test_trivial_solution_satisfies_euler_for_any_b():
    for b in (0.3, 1.5):
        profile = trivial_solution(VortexParams(b=b, C_omega=1.3))
        for report in euler_residuals(profile, Mesh(100)):
            assert report.sup_norm == 0.0


@pytest.mark.parametrize('b', [0.2, 0.5, 0.8])
def test_initial_guess_residual_identity(b, nodes_100):
    profile = guess_profile(b)
    first, second = euler_residuals(profile, nodes=nodes_100)
    assert first.relative_sup <= 1e-10
    x = nodes_100
    expected = (2 ** (1 - b) * (2 - b) * (1 - b) * (2 + x) / (1 + x) * (x * (1 - x)) ** (1 - b))
    np.testing.assert_allclose(second.residuals, expected, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize('b', [0.6, 1.0, 1.5])
def test_dual_forms_agree(b, nodes_100):
    profile = polynomial_profile(b)
    for evaluate in (eval_C, eval_D, eval_composites):
        upper = evaluate(nodes_100, profile, Case.UPPER)
        lower = evaluate(nodes_100, profile, Case.LOWER)
        for a, c in zip(upper, lower):
            np.testing.assert_allclose(a, c, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize('b', [0.6, 1.0, 1.5])
def test_substituted_forms_match_general_forms(b, nodes_100):
    profile = polynomial_profile(b)
    upper = eval_substituted(nodes_100, profile, Case.UPPER)
    lower = eval_substituted(nodes_100, profile, Case.LOWER)
    for key in ('C3', 'D3', 'C1C2', 'D1D2'):
        np.testing.assert_allclose(upper[key], lower[key], rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(upper['C3'], eval_C(nodes_100, profile)[2], rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(upper['D3'], eval_D(nodes_100, profile)[2], rtol=1e-9, atol=1e-9)
    c, d = eval_composites(nodes_100, profile)
    np.testing.assert_allclose(upper['C1C2'], c, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(upper['D1D2'], d, rtol=1e-8, atol=1e-8)


def test_substituted_forms_need_b_not_two():
    with pytest.raises(ValidationError):
        eval_substituted([0.5], trivial_solution(VortexParams(b=2.0)))


def test_composite_is_angular_derivative_plus_c2():
    b = 0.6
    profile = polynomial_profile(b)
    x = np.linspace(0.2, 0.8, 7)
    step = 1e-5
    C1_plus = eval_C(x + step, profile)[0]
    C1_minus = eval_C(x - step, profile)[0]
    _, C2, _ = eval_C(x, profile)
    # dx/dα = -sin α = -√(1-x^2)
    dC1 = -np.sqrt(1 - x ** 2) * (C1_plus - C1_minus) / (2 * step)
    c, _ = eval_composites(x, profile)
    np.testing.assert_allclose(c, dC1 + 2 * b * C2, rtol=1e-6, atol=1e-8)


def test_forms_reject_endpoints(b1_profile):
    with pytest.raises(SingularPointError):
        eval_C([0.0, 0.5], b1_profile)


def test_sign_symmetries(nodes_100):
    profile = guess_profile(0.6)
    first, second = euler_residuals(profile, nodes=nodes_100)
    r_first, r_second = euler_residuals(reverse(profile), nodes=nodes_100)
    np.testing.assert_allclose(r_first.residuals, first.residuals, atol=1e-14)
    np.testing.assert_allclose(r_second.residuals, second.residuals, atol=1e-14)
    f_first, f_second = euler_residuals(flip_swirl(profile), nodes=nodes_100)
    np.testing.assert_allclose(f_first.residuals, -first.residuals, atol=1e-14)
    np.testing.assert_allclose(f_second.residuals, second.residuals, atol=1e-14)


def test_b2_sets_for_rigid_swirl():
    profile = trivial_solution(VortexParams(b=2.0, nu=0.1, C_omega=1.7))
    mesh = Mesh(50)
    for report in euler_b2_residuals(profile, mesh):
        assert report.sup_norm == 0.0
    product, swirl, meridional = viscous_b2_residuals(profile, mesh)
    assert product.sup_norm == 0.0 and meridional.sup_norm == 0.0
    np.testing.assert_array_equal(swirl.residuals, 3 * 1.7)
    assert [r.equation_id for r in ns_residuals(profile, profile.params, mesh)] == [
        EquationId.B2_PRODUCT, EquationId.B2_SWIRL, EquationId.B2_MERIDIONAL]


def test_euler_redirects_at_b2():
    profile = trivial_solution(VortexParams(b=2.0))
    first, second = euler_residuals(profile, Mesh(20))
    assert first.equation_id == EquationId.B2_PRODUCT
    assert second.equation_id == EquationId.B2_MERIDIONAL


def test_serrin_system_for_potential_vortex():
    profile = trivial_solution(VortexParams(b=1.0, nu=0.01))
    for report in serrin_residuals(profile, 0.01, Mesh(100)):
        assert report.sup_norm == 0.0


def test_ns_residuals_require_viscosity(b1_profile):
    with pytest.raises(ValidationError):
        ns_residuals(b1_profile, b1_profile.params, Mesh(10))


def test_ns_residuals_split_for_general_b():
    profile = trivial_solution(VortexParams(b=0.5, nu=0.1))
    reports = ns_residuals(profile, profile.params, Mesh(20))
    assert [r.equation_id for r in reports] == [EquationId.C3, EquationId.D3, EquationId.C1C2,
                                                 EquationId.D1D2, EquationId.CONTINUITY]
    # D3 für Ω ≡ C: -(1-b^2) C/(1-x^2) bleibt stehen
    assert reports[1].sup_norm > 0


@pytest.mark.parametrize('b,nu,expected', [
    (0.6, 0.0, GoverningMode.INVISCID_REDUCED),
    (2.0, 0.0, GoverningMode.INVISCID_B2),
    (1.0, 0.1, GoverningMode.VISCOUS_B1),
    (2.0, 0.1, GoverningMode.VISCOUS_B2),
    (0.6, 0.1, GoverningMode.VISCOUS_SPLIT),
])
def test_mode_selection(b, nu, expected):
    assert GoverningMode.select(VortexParams(b=b, nu=nu)) == expected


def test_governing_residuals_with_explicit_mode(b1_profile):
    reports = governing_residuals(b1_profile, mesh=Mesh(100))
    assert [r.equation_id for r in reports] == [EquationId.C3, EquationId.C1C2]
    viscous = governing_residuals(b1_profile, VortexParams(b=1.0, nu=0.1), Mesh(100),
                                  mode=GoverningMode.VISCOUS_B1)
    assert [r.equation_id for r in viscous] == [EquationId.SERRIN_1, EquationId.SERRIN_2]
    # viskoser Term von F bleibt übrig
    assert viscous[0].sup_norm > 1e-3


def test_report_helpers():
    report = ResidualReport(EquationId.C3, [0.1, 0.5, 0.9], [1e-3, -2e-3, 0.0], [1.0, 1.0, 0.0])
    assert report.sup_norm == pytest.approx(2e-3)
    assert report.relative_sup == pytest.approx(1e-3)
    assert report.passes(1e-3)
    assert not report.passes(1e-3, relative=False)
    assert report.restricted(0.2, 0.9).nodes.tolist() == [0.5, 0.9]
    frame = reports_to_frame([report, report])
    assert list(frame.columns) == ['x', 'equation_id', 'residual']
    assert len(frame) == 6
    assert report.summary()['equation_id'] == 'C3eq'
    with pytest.raises(ValidationError):
        ResidualReport(EquationId.C3, [0.1, 0.2], [0.0])


def test_pressure_matches_closed_form(b1_profile):
    R = np.array([0.5, 1.0, 2.0])
    x = np.array([0.2, 0.5, 0.8])
    general = pressure_from_profile(R, x, b1_profile, T=0.3)
    closed = pressure_b1(R, x, b1_profile.metadata['C1'], 1.0, T=0.3)
    np.testing.assert_allclose(general, closed, rtol=1e-8)


def test_pressure_of_potential_vortex():
    profile = trivial_solution(VortexParams(b=1.0, nu=0.2, C_omega=2.0))
    R, x = 2.0, 0.6
    r = R * np.sqrt(1 - x ** 2)
    assert pressure_from_profile(R, x, profile) == pytest.approx(-4.0 / (2 * r ** 2))


def test_fullfield_oracle_for_b1_family(b1_profile):
    fine = fullfield_ns_residual(b1_profile, spacing=1e-3)
    coarse = fullfield_ns_residual(b1_profile, spacing=2e-3)
    assert [r.equation_id for r in fine] == [EquationId.FULL_R, EquationId.FULL_ALPHA,
                                             EquationId.FULL_THETA, EquationId.CONTINUITY]
    for f, c in zip(fine, coarse):
        assert f.sup_norm <= 1e-3
        assert f.sup_norm <= c.sup_norm + 1e-12
    assert fine[0].to_frame().columns.tolist() == ['r', 'z', 'equation_id', 'residual']


def test_fullfield_oracle_for_viscous_potential_vortex():
    profile = trivial_solution(VortexParams(b=1.0, nu=0.1))
    for report in fullfield_ns_residual(profile, spacing=1e-3):
        assert report.sup_norm <= 1e-3


def test_fullfield_detects_wrong_solution():
    wrong = inviscid_b1(4.0, 1.0)
    reports = fullfield_ns_residual(wrong, VortexParams(b=1.0, nu=0.5), spacing=1e-3)
    assert max(r.sup_norm for r in reports) > 1e-3


def test_fullfield_keeps_distance_from_boundaries(b1_profile):
    with pytest.raises(ValidationError):
        fullfield_ns_residual(b1_profile, r_range=(0.001, 1.0), spacing=1e-3)
