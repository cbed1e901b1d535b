import numpy as np
import pytest

from src.config import NewtonConfig
from src.exceptions import NonConvergenceError, ValidationError
from src.fields import classify_stability
from src.model import Case, Mesh, as_upper, profile_flux
from src.residuals import continuity_residuals, euler_residuals
from src.solvers.base_solver import BaseSolver
from src.solvers.inviscid import (GENERATOR, InviscidProblem, InviscidSolver, distance_to_b1,
                                  feasibility_survey, initial_guess, p_equation, profile_from_p,
                                  solve_inviscid, sweep_b, sweep_c, sweep_frame)


class SquareRoot(BaseSolver):
    def __init__(self, targets, newton=None):
        super().__init__('square-root', newton)
        self.targets = np.asarray(targets, dtype=float)

    @property
    def bandwidth(self):
        return 0, 0

    def residual(self, unknowns):
        return unknowns ** 2 - self.targets


def test_base_solver_converges_on_diagonal_system():
    result = SquareRoot([2.0, 9.0]).solve(np.array([1.0, 1.0]))
    np.testing.assert_allclose(result.unknowns, [np.sqrt(2.0), 3.0], rtol=1e-10)
    assert result.residual_norm <= 1e-10
    assert result.history[0] > result.history[-1]
    assert result.to_dict()['iterations'] == result.iterations


def test_base_solver_solves_single_unknown():
    result = SquareRoot([4.0]).solve(np.array([1.0]))
    assert result.unknowns[0] == pytest.approx(2.0, rel=1e-12)


def test_base_solver_reports_failure():
    with pytest.raises(NonConvergenceError) as info:
        SquareRoot([-1.0]).solve(np.array([1.0]))
    assert info.value.exit_code == 3


def test_base_solver_iteration_cap():
    with pytest.raises(NonConvergenceError):
        SquareRoot([2.0], NewtonConfig(max_iter=1)).solve(np.array([100.0]))


def test_initial_guess_values():
    p0 = initial_guess(0.5, Mesh(6))
    assert p0[0] == 0.0 and p0[-1] == 1.0
    assert p0[2] == pytest.approx(0.35355, abs=1e-5)
    with pytest.raises(ValidationError):
        initial_guess(1.0, Mesh(6))


@pytest.mark.parametrize('b,c', [(1.2, 0.25), (1.0, 0.25), (2.5, 0.25), (0.6, 0.0), (0.6, -1.0)])
def test_problem_rejects_invalid_parameters(b, c):
    with pytest.raises(ValidationError):
        InviscidProblem(b, c, Mesh(100))


def test_problem_rejects_nonpositive_tolerance():
    with pytest.raises(ValidationError):
        InviscidProblem(0.6, 0.25, Mesh(100), NewtonConfig(tol=0.0))


def test_swirl_term_of_p_equation():
    # c geht nur über 2 c^2 (1-b) p^((3-2b)/(2-b)) p' ein
    b = 0.6
    x = np.linspace(0.1, 0.9, 9)
    p = x ** 1.4
    dp = (1.4 * x ** 0.4, 0.56 * x ** -0.6, -0.336 * x ** -1.6)
    without = p_equation(p, dp, x, b, 0.0)
    with_swirl = p_equation(p, dp, x, b, 0.5)
    expected = 2 * 0.25 * (1 - b) * p ** ((3 - 2 * b) / (2 - b)) * dp[0]
    np.testing.assert_allclose(with_swirl - without, expected, rtol=1e-10)


def test_assemble_residual_checks_iterate():
    solver = InviscidSolver(InviscidProblem(0.6, 0.25, Mesh(50)))
    p0 = initial_guess(0.6, Mesh(50))
    values = solver.assemble_residual(p0)
    assert values.shape == (49,)
    assert np.all(np.isfinite(values))
    np.testing.assert_array_equal(values, solver.residual(p0[1:-1]))
    with pytest.raises(ValidationError):
        solver.assemble_residual(p0[:-1])
    bad = p0.copy()
    bad[10] = -1.0
    with pytest.raises(ValidationError):
        solver.assemble_residual(bad)


def test_exact_jacobian_matches_differences():
    mesh = Mesh(50)
    solver = InviscidSolver(InviscidProblem(0.6, 0.25, mesh))
    unknowns = initial_guess(0.6, mesh)[1:-1]
    exact = solver.to_banded(solver.exact_jacobian(unknowns))
    differences = solver.finite_difference_jacobian(unknowns, solver.residual(unknowns))
    np.testing.assert_allclose(exact, differences, rtol=1e-5, atol=1e-6 * np.max(np.abs(exact)))


def test_jacobian_option():
    mesh = Mesh(50)
    unknowns = initial_guess(0.6, mesh)[1:-1]
    base = np.zeros(unknowns.size)
    differences = InviscidSolver(
        InviscidProblem(0.6, 0.25, mesh, NewtonConfig(jacobian='finite-differences')))
    np.testing.assert_array_equal(differences.jacobian(unknowns, base),
                                  differences.finite_difference_jacobian(unknowns, base))
    unknown = InviscidSolver(InviscidProblem(0.6, 0.25, mesh, NewtonConfig(jacobian='secant')))
    with pytest.raises(ValidationError):
        unknown.jacobian(unknowns, base)


def test_converged_solution(inviscid_solution):
    profile, solution, mesh = inviscid_solution
    assert solution.residual_norm <= 1e-6
    equation = InviscidSolver(InviscidProblem(0.6, 0.25, mesh)).assemble_residual(solution.p)
    assert np.max(np.abs(equation)) <= 1e-6
    assert solution.p[0] == 0.0 and solution.p[-1] == 1.0
    assert np.min(solution.p) >= 0.0
    assert profile.case == Case.LOWER
    assert profile.metadata['generator'] == GENERATOR
    assert profile.metadata['c'] == 0.25
    assert profile.params.C_omega == 0.25
    assert solution.to_dict()['iterations'] == solution.newton_iters


def test_converged_profile_shape(inviscid_solution):
    profile, _, mesh = inviscid_solution
    x = mesh.trimmed(0.05)
    F, G, O = as_upper(profile).evaluate(x, order=0, strict=False)
    assert np.all(F[0] > 0)
    assert np.all(O[0] > 0)
    signs = np.sign(G[0])
    assert np.count_nonzero(np.diff(signs[signs != 0])) == 1


def test_converged_swirl_near_ground(inviscid_solution):
    profile, _, mesh = inviscid_solution
    _, _, O = as_upper(profile).evaluate(mesh.nodes[:30], order=0, strict=False)
    assert O[0][0] == 0.0
    assert np.all(np.diff(O[0]) > 0)


def test_converged_profile_satisfies_euler(inviscid_solution):
    profile, _, mesh = inviscid_solution
    for report in euler_residuals(profile, nodes=mesh.trimmed(0.1)):
        assert report.sup_norm <= 1e-6


def test_converged_profile_has_no_source_flux(inviscid_solution):
    profile, _, mesh = inviscid_solution
    assert abs(profile_flux(profile)) <= 1e-5
    assert continuity_residuals(profile, nodes=mesh.trimmed(0.1)).relative_sup <= 1e-6


def test_converged_profile_is_rayleigh_stable(inviscid_solution):
    profile, _, mesh = inviscid_solution
    assert classify_stability(profile, mesh=Mesh(200)).stable


def test_profile_from_p_matches_solution(inviscid_solution):
    profile, solution, mesh = inviscid_solution
    rebuilt = profile_from_p(0.6, 0.25, mesh, solution.p)
    x = mesh.trimmed(0.1)
    np.testing.assert_array_equal(rebuilt.first(x), profile.first(x))
    assert np.isfinite(distance_to_b1(profile, mesh))


def test_sweeps_require_sorted_lists():
    with pytest.raises(ValidationError):
        sweep_b([0.5, 0.3], 0.25, Mesh(100))
    with pytest.raises(ValidationError):
        sweep_c([0.5, 0.3], 0.6, Mesh(100))


@pytest.mark.slow
def test_single_entry_sweep_equals_direct_solve():
    mesh = Mesh(200)
    entries = sweep_b([0.6], 0.25, mesh)
    _, solution = solve_inviscid(0.6, 0.25, mesh)
    assert entries[0].converged
    np.testing.assert_array_equal(entries[0].solution.p, solution.p)
    frame = sweep_frame(entries)
    assert frame.loc[0, 'converged']


@pytest.mark.slow
def test_b_sweep_is_monotone():
    mesh = Mesh.from_step(1e-3)
    entries = sweep_b([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], 0.25, mesh)
    assert all(entry.converged for entry in entries)
    x = mesh.trimmed(0.1)
    F = [as_upper(e.profile).first(x) for e in entries]
    O = [as_upper(e.profile).third(x) for e in entries]
    for lower, upper in zip(F, F[1:]):
        assert np.all(upper >= lower - 1e-9)
    for lower, upper in zip(O, O[1:]):
        assert np.all(upper >= lower - 1e-9)


@pytest.mark.slow
def test_distance_to_b1_family_shrinks():
    mesh = Mesh.from_step(1e-3)
    entries = sweep_b([0.9, 0.95, 0.99], 0.25, mesh)
    distances = [entry.distance_to_b1 for entry in entries]
    assert distances[0] > distances[1] > distances[2]


@pytest.mark.slow
def test_c_sweep_scaled_profiles_decrease():
    mesh = Mesh.from_step(1e-3)
    entries = sweep_c([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0], 0.6, mesh)
    assert all(entry.converged for entry in entries)
    x = mesh.trimmed(0.1)
    scaled = [as_upper(e.profile).scaled(1.0 / e.c) for e in entries]
    for component in (lambda p: p.first(x), lambda p: p.third(x)):
        values = [component(p) for p in scaled]
        for larger_c, smaller_c in zip(values[1:], values):
            assert np.all(larger_c <= smaller_c + 1e-9)


@pytest.mark.slow
def test_large_swirl_does_not_converge():
    with pytest.raises(NonConvergenceError):
        solve_inviscid(0.6, 50.0, Mesh.from_step(1e-3))


@pytest.mark.slow
def test_warm_start_saves_iterations():
    mesh = Mesh.from_step(1e-3)
    _, previous = solve_inviscid(0.8, 0.25, mesh)
    _, cold = solve_inviscid(0.9, 0.25, mesh)
    _, warm = solve_inviscid(0.9, 0.25, mesh, guess=previous.p)
    assert warm.newton_iters <= cold.newton_iters


@pytest.mark.slow
def test_mesh_refinement_reduces_change():
    solutions = [solve_inviscid(0.6, 0.25, Mesh(n))[1] for n in (250, 500, 1000)]
    coarse_change = np.max(np.abs(solutions[1].p[::2] - solutions[0].p))
    fine_change = np.max(np.abs(solutions[2].p[::4] - solutions[1].p[::2]))
    assert fine_change < coarse_change


@pytest.mark.slow
def test_feasibility_survey():
    frame = feasibility_survey([0.6], [0.25, 50.0], Mesh(200), threads=2)
    assert list(frame.columns) == ['b', 'c', 'converged', 'iterations', 'residual_norm']
    assert frame['converged'].tolist() == [True, False]
