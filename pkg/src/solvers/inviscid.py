"""
Reibungsfreier Löser für 0 < b < 1

Mit f = √p (1-x^2)^((2-b)/2) und Ω = c p^((1-b)/(2(2-b))) ist die erste
reduzierte Euler-Gleichung erfüllt; die zweite wird zu einer Gleichung
dritter Ordnung für p mit p(0) = 0 und p(1) = 1. Sie wird an allen inneren
Knoten kollokiert und mit dem gedämpften Newton-Verfahren gelöst.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from ..analytic import inviscid_b1
from ..config import NewtonConfig
from ..exceptions import NonConvergenceError, ValidationError
from ..model import (Case, Mesh, Profile, SampledComponent, VortexParams,
                     as_upper, continuity_g_from_f)
from ..utils.finite_differences import differentiation_matrix
from ..utils.stacks import one_minus_x2
from .base_solver import BaseSolver, NewtonResult

logger = logging.getLogger(__name__)

GENERATOR = 'newton-inviscid'


@dataclass(frozen=True)
class InviscidProblem:
    """
    Randwertproblem für p bei festem (b, c)
    """
    b: float
    c: float
    mesh: Mesh
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if self.b >= 2:
            raise ValidationError(f"b={self.b}: no inviscid solutions exist for b >= 2")
        if self.b > 1:
            raise ValidationError(f"b={self.b}: solutions with 1 < b < 2 are unstable, solver requires 0 < b < 1")
        if not 0 < self.b < 1:
            raise ValidationError(f"solver requires 0 < b < 1, got b={self.b}")
        if not self.c > 0:
            raise ValidationError(f"c must be > 0, got {self.c}")
        if not self.newton.tol > 0:
            raise ValidationError(f"tol must be > 0, got {self.newton.tol}")

    @property
    def params(self) -> VortexParams:
        return VortexParams(b=self.b, nu=0.0, C_omega=self.c)


@dataclass
class PSolution:
    """Knotenwerte p = γ^2 einschließlich der Randwerte"""
    p: np.ndarray
    mesh: Mesh
    residual_norm: float
    newton_iters: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'h': self.mesh.h,
            'residual_norm': self.residual_norm,
            'iterations': self.newton_iters
        }


def initial_guess(b: float, mesh: Mesh) -> np.ndarray:
    """p0 = (2x/(1+x))^(2-b) aus f0 = 2^((1-b)/2) (x(1-x))^((2-b)/2)"""
    if not 0 < b < 1:
        raise ValidationError(f"initial guess requires 0 < b < 1, got b={b}")
    x = mesh.nodes
    return (2.0 * x / (1.0 + x)) ** (2.0 - b)


def p_equation(p: np.ndarray, dp: Sequence[np.ndarray], x: np.ndarray, b: float, c: float,
               eps: float = 1e-300) -> np.ndarray:
    """
    Linke Seite der Gleichung für p

        p^2 [u(u p''' - 2(4-b) x p'') - 2(2+b-3(2-b)x^2) p']
          + 2c^2 (1-b) p^((3-2b)/(2-b)) p'
          + q u p' [u p'^2 - 2p(u p'' - (2-b) x p')]

    mit u = 1-x^2 und q = (1-b)/(2-b).
    """
    d1, d2, d3 = dp
    u = 1.0 - x ** 2
    q = (1.0 - b) / (2.0 - b)
    power = np.exp((3.0 - 2.0 * b) / (2.0 - b) * np.log(np.maximum(p, eps)))
    return (p ** 2 * (u * (u * d3 - 2.0 * (4.0 - b) * x * d2) - 2.0 * (2.0 + b - 3.0 * (2.0 - b) * x ** 2) * d1)
            + 2.0 * c ** 2 * (1.0 - b) * power * d1
            + q * u * d1 * (u * d1 ** 2 - 2.0 * p * (u * d2 - (2.0 - b) * x * d1)))


def p_equation_partials(p: np.ndarray, dp: Sequence[np.ndarray], x: np.ndarray, b: float, c: float,
                        eps: float = 1e-300) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Partielle Ableitungen von p_equation nach p, p', p'' und p'''"""
    d1, d2, d3 = dp
    u = 1.0 - x ** 2
    q = (1.0 - b) / (2.0 - b)
    m = (3.0 - 2.0 * b) / (2.0 - b)
    floor = np.maximum(p, eps)
    power = np.exp(m * np.log(floor))
    power_slope = np.where(p > eps, m * power / floor, 0.0)
    a1 = -2.0 * (2.0 + b - 3.0 * (2.0 - b) * x ** 2)
    leading = u * (u * d3 - 2.0 * (4.0 - b) * x * d2) + a1 * d1
    inner = u * d2 - (2.0 - b) * x * d1
    bracket = u * d1 ** 2 - 2.0 * p * inner

    by_p = 2.0 * p * leading + 2.0 * c ** 2 * (1.0 - b) * power_slope * d1 - 2.0 * q * u * d1 * inner
    by_d1 = (p ** 2 * a1 + 2.0 * c ** 2 * (1.0 - b) * power
             + q * u * (bracket + d1 * (2.0 * u * d1 + 2.0 * (2.0 - b) * x * p)))
    by_d2 = -2.0 * (4.0 - b) * x * u * p ** 2 - 2.0 * q * u ** 2 * p * d1
    by_d3 = p ** 2 * u ** 2
    return by_p, by_d1, by_d2, by_d3


class InviscidSolver(BaseSolver):
    """
    Kollokation der p-Gleichung an den Knoten x_1 .. x_(N-1)

    Das Residuum ist die unskalierte linke Seite von p_equation; die
    Jacobimatrix wird analytisch aus den Differentiationsmatrizen gebildet.
    """

    def __init__(self, problem: InviscidProblem):
        super().__init__(f"inviscid(b={problem.b:g}, c={problem.c:g})", problem.newton)
        self.problem = problem
        mesh = problem.mesh
        n_nodes = mesh.n + 1
        self._operators = [differentiation_matrix(n_nodes, mesh.h, order) for order in (1, 2, 3)]
        self._inner = [op[1:-1, 1:-1] for op in self._operators]
        self._x = mesh.interior

    @property
    def bandwidth(self) -> Tuple[int, int]:
        return 3, 3

    def full(self, unknowns: np.ndarray) -> np.ndarray:
        """Randwerte p(0)=0, p(1)=1 ergänzen"""
        return np.concatenate(([0.0], unknowns, [1.0]))

    def admissible(self, unknowns: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(unknowns)) and np.min(unknowns) >= self.newton.negative_floor)

    def assemble_residual(self, p: np.ndarray) -> np.ndarray:
        """Residuum aus vollständigen Knotenwerten"""
        p = np.asarray(p, dtype=float)
        if p.size != self.problem.mesh.n + 1:
            raise ValidationError(f"expected {self.problem.mesh.n + 1} node values, got {p.size}")
        if np.min(p) < self.newton.negative_floor:
            raise ValidationError(f"iterate invalid: min p = {np.min(p):.3e}")
        return self._equation(p)

    def _derivatives(self, p: np.ndarray) -> List[np.ndarray]:
        return [(op @ p)[1:-1] for op in self._operators]

    def _equation(self, p: np.ndarray) -> np.ndarray:
        return p_equation(p[1:-1], self._derivatives(p), self._x, self.problem.b, self.problem.c,
                          self.newton.eps)

    def residual(self, unknowns: np.ndarray) -> np.ndarray:
        return self._equation(self.full(unknowns))

    def exact_jacobian(self, unknowns: np.ndarray) -> sp.csr_matrix:
        p = self.full(unknowns)
        by_p, *by_derivative = p_equation_partials(unknowns, self._derivatives(p), self._x,
                                                   self.problem.b, self.problem.c, self.newton.eps)
        jacobian = sp.diags(by_p)
        for weights, op in zip(by_derivative, self._inner):
            jacobian = jacobian + sp.diags(weights) @ op
        return sp.csr_matrix(jacobian)

    def newton_solve(self, guess: Optional[np.ndarray] = None) -> PSolution:
        """
        Löst das Randwertproblem

        Args:
            guess: Knotenwerte mit Randwerten; Standard ist initial_guess

        Raises:
            NonConvergenceError: Hinweis auf einen unzulässigen (b, c)-Bereich
        """
        mesh = self.problem.mesh
        if guess is None:
            guess = initial_guess(self.problem.b, mesh)
        guess = np.asarray(guess, dtype=float)
        if guess.size != mesh.n + 1:
            raise ValidationError(f"guess must have {mesh.n + 1} node values, got {guess.size}")
        result: NewtonResult = self.solve(guess[1:-1])
        return PSolution(self.full(result.unknowns), mesh, result.residual_norm, result.iterations)


def profile_from_p(b: float, c: float, mesh: Mesh, p: Sequence[float],
                   metadata: Optional[Dict[str, Any]] = None) -> Profile:
    """
    Kleinbuchstaben-Profil aus Knotenwerten von p

    f = √p (1-x^2)^((2-b)/2), ω = c p^((1-b)/(2(2-b))) (1-x^2)^((1-b)/2),
    g aus der Kontinuität. Die Potenzen von (1-x^2) sind exakt, nur p wird
    interpoliert.
    """
    p_component = SampledComponent(mesh, np.maximum(np.asarray(p, dtype=float), 0.0), 'p')
    half_power = (1.0 - b) / (2.0 * (2.0 - b))
    f = p_component.map(lambda x, s: s.sqrt() * one_minus_x2(x, (2.0 - b) / 2.0), name='f')
    omega = p_component.map(lambda x, s: s.power(half_power) * one_minus_x2(x, (1.0 - b) / 2.0) * c,
                            name='omega')
    g = continuity_g_from_f(f, b)
    meta = {'generator': GENERATOR, 'c': float(c), 'h': mesh.h, 'p': np.asarray(p, dtype=float)}
    meta.update(metadata or {})
    return Profile(Case.LOWER, VortexParams(b=b, nu=0.0, C_omega=c), f, g, omega, meta)


def recover_profile(solution: PSolution, problem: InviscidProblem) -> Profile:
    """Profil zu einer konvergierten Lösung"""
    return profile_from_p(problem.b, problem.c, solution.mesh, solution.p, {
        'residual_norm': solution.residual_norm,
        'iterations': solution.newton_iters
    })


def solve_inviscid(b: float, c: float, mesh: Mesh, newton: Optional[NewtonConfig] = None,
                   guess: Optional[np.ndarray] = None) -> Tuple[Profile, PSolution]:
    """Einzelner Lauf: Problem aufsetzen, lösen, Profil rekonstruieren"""
    problem = InviscidProblem(b, c, mesh, newton or NewtonConfig())
    solution = InviscidSolver(problem).newton_solve(guess)
    return recover_profile(solution, problem), solution


def distance_to_b1(profile: Profile, mesh: Mesh, C1: float = 4.0 * 2.0 ** 0.5,
                   C_omega: float = 1.0) -> float:
    """
    Maximaler Abstand von F und Ω zur b=1-Lösung

    Das Profil wird vorher durch c geteilt, damit Ω(1) = 1 gilt.
    """
    c = profile.metadata.get('c', profile.params.C_omega)
    upper = as_upper(profile).scaled(1.0 / c)
    reference = inviscid_b1(C1, C_omega)
    x = mesh.interior
    F, _, O = upper.evaluate(x, order=0, strict=False)
    F_ref, _, O_ref = reference.evaluate(x, order=0, strict=False)
    return float(max(np.max(np.abs(F[0] - F_ref[0])), np.max(np.abs(O[0] - O_ref[0]))))


@dataclass
class SweepEntry:
    """Ein Eintrag eines b- oder c-Sweeps"""
    b: float
    c: float
    converged: bool
    iterations: int = 0
    residual_norm: float = float('nan')
    distance_to_b1: float = float('nan')
    error: str = ''
    profile: Optional[Profile] = None
    solution: Optional[PSolution] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'b': self.b,
            'c': self.c,
            'converged': self.converged,
            'iterations': self.iterations,
            'residual_norm': self.residual_norm,
            'distance_to_b1': self.distance_to_b1,
            'error': self.error
        }


def _run_entry(b: float, c: float, mesh: Mesh, newton: NewtonConfig,
               guess: Optional[np.ndarray], limit: Tuple[float, float]) -> SweepEntry:
    try:
        profile, solution = solve_inviscid(b, c, mesh, newton, guess)
    except NonConvergenceError as error:
        logger.warning(f"Sweep entry b={b:g}, c={c:g} did not converge: {error}")
        return SweepEntry(b, c, False, error.iterations, error.residual_norm, error=str(error))
    distance = distance_to_b1(profile, mesh, *limit)
    logger.info(f"Sweep entry b={b:g}, c={c:g}: {solution.newton_iters} iterations, "
                f"distance to b=1 family {distance:.4f}")
    return SweepEntry(b, c, True, solution.newton_iters, solution.residual_norm,
                      distance, profile=profile, solution=solution)


def _continuation(pairs: Sequence[Tuple[float, float]], mesh: Mesh, newton: NewtonConfig,
                  limit: Tuple[float, float]) -> List[SweepEntry]:
    entries = []
    guess = None
    for b, c in pairs:
        entry = _run_entry(b, c, mesh, newton, guess, limit)
        if entry.converged:
            guess = entry.solution.p
        entries.append(entry)
    return entries


def sweep_b(b_list: Sequence[float], c: float, mesh: Mesh, newton: Optional[NewtonConfig] = None,
            limit: Tuple[float, float] = (4.0 * 2.0 ** 0.5, 1.0)) -> List[SweepEntry]:
    """
    Fortsetzung in b mit Warmstart aus dem letzten konvergierten Eintrag

    Nicht konvergierte Einträge werden protokolliert, der Sweep läuft weiter.
    """
    b_list = [float(b) for b in b_list]
    if b_list != sorted(b_list):
        raise ValidationError("b_list must be sorted in increasing order")
    return _continuation([(b, c) for b in b_list], mesh, newton or NewtonConfig(), limit)


def sweep_c(c_list: Sequence[float], b: float, mesh: Mesh, newton: Optional[NewtonConfig] = None,
            limit: Tuple[float, float] = (4.0 * 2.0 ** 0.5, 1.0)) -> List[SweepEntry]:
    """Fortsetzung in c bei festem b"""
    c_list = [float(c) for c in c_list]
    if c_list != sorted(c_list):
        raise ValidationError("c_list must be sorted in increasing order")
    return _continuation([(b, c) for c in c_list], mesh, newton or NewtonConfig(), limit)


def sweep_frame(entries: Sequence[SweepEntry]) -> pd.DataFrame:
    return pd.DataFrame([entry.to_dict() for entry in entries])


def feasibility_survey(b_list: Sequence[float], c_list: Sequence[float], mesh: Mesh,
                       newton: Optional[NewtonConfig] = None, threads: int = 1) -> pd.DataFrame:
    """
    Kaltstarts auf dem Gitter b_list x c_list

    Returns:
        DataFrame mit b, c, converged, iterations, residual_norm
    """
    newton = newton or NewtonConfig()
    pairs = [(float(b), float(c)) for b in b_list for c in c_list]
    limit = (4.0 * 2.0 ** 0.5, 1.0)

    def run(pair):
        return _run_entry(pair[0], pair[1], mesh, newton, None, limit)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        entries = list(pool.map(run, pairs))

    frame = sweep_frame(entries)[['b', 'c', 'converged', 'iterations', 'residual_norm']]
    logger.info(f"Feasibility survey: {int(frame['converged'].sum())}/{len(frame)} converged")
    return frame
