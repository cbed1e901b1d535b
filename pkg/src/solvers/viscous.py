"""
Viskoser Löser für b = 1 (Serrins System) und Grenzschicht-Experiment

    ν(1-x^2) F'''' - 4νx F''' + F F''' + 3F'F'' + 2ΩΩ'/(1-x^2) = 0
    ν(1-x^2) Ω'' + F Ω' = 0

Randbedingungen F(0) = F'(0) = 0, Ω(0) = 0, F(1) = 0, Ω(1) = C_ω. Die
sechste Bedingung ist der Parameter 'closure' = F'' am ersten inneren Knoten.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy import optimize, stats

from ..config import NewtonConfig
from ..exceptions import NonConvergenceError, ValidationError
from ..model import (Case, Mesh, Profile, SampledComponent, VortexParams, as_upper,
                     continuity_G_from_F)
from ..utils.finite_differences import FiniteDifferences, differentiation_matrix
from .base_solver import BaseSolver

logger = logging.getLogger(__name__)

GENERATOR = 'newton-viscous-b1'


def default_closure(nu: float, C_omega: float) -> float:
    """C_ω^2 / (2ν), entspricht C1 = C_ω im Außenbereich"""
    return C_omega ** 2 / (2.0 * nu)


def default_mesh(nu: float) -> Mesh:
    """Gleichmäßiges Gitter mit h <= min(1e-3, ν/4)"""
    return Mesh.with_max_step(min(1e-3, nu / 4.0))


@dataclass(frozen=True)
class ViscousProblem:
    """
    Randwertproblem für (F, Ω) bei festem ν
    """
    nu: float
    C_omega: float = 1.0
    mesh: Optional[Mesh] = None
    closure: Optional[float] = None
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if not self.nu > 0:
            raise ValidationError(f"nu must be > 0, got {self.nu}")
        if self.mesh is None:
            object.__setattr__(self, 'mesh', default_mesh(self.nu))
        if self.closure is None:
            object.__setattr__(self, 'closure', default_closure(self.nu, self.C_omega))
        if self.mesh.h > self.nu / 4.0:
            logger.warning(f"h={self.mesh.h:.2e} exceeds nu/4={self.nu / 4:.2e}; layer may be under-resolved")

    @property
    def k(self) -> float:
        return 1.0 / (2.0 * self.nu)

    @property
    def params(self) -> VortexParams:
        return VortexParams(b=1.0, nu=self.nu, C_omega=self.C_omega)

    def with_nu(self, nu: float, closure: float) -> 'ViscousProblem':
        return ViscousProblem(nu, self.C_omega, self.mesh, closure, self.newton)


@dataclass
class LayerMeasurement:
    """Gemessene Grenzschichtdicke in x"""
    nu: float
    layer_x: float
    delta: float

    def to_dict(self) -> Dict[str, Any]:
        return {'nu': self.nu, 'layer_x': self.layer_x, 'delta': self.delta}


class ViscousSolver(BaseSolver):
    """
    Gekoppelte Kollokation mit verschränkten Unbekannten (F_i, Ω_i), i = 1..N-1

    Zeilen der F-Plätze: Knoten 1 F'(0) = 0, Knoten 2 F''(x_1) = closure,
    ab Knoten 3 die mit (1-x^2) multiplizierte erste Gleichung. Ω-Plätze
    tragen die zweite Gleichung an allen inneren Knoten.
    """

    def __init__(self, problem: ViscousProblem):
        super().__init__(f"viscous(nu={problem.nu:g})", problem.newton)
        self.problem = problem
        mesh = problem.mesh
        n_nodes = mesh.n + 1
        self._d = {order: differentiation_matrix(n_nodes, mesh.h, order) for order in (1, 2, 3, 4)}
        start, size = FiniteDifferences.window(0, n_nodes, 1)
        self._slope_at_ground = FiniteDifferences.weights(tuple(range(size)), 1)
        self._x = mesh.nodes

    @property
    def bandwidth(self) -> Tuple[int, int]:
        return 9, 9

    def split(self, unknowns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Vollständige Knotenwerte (F, Ω) mit Randwerten"""
        F = np.concatenate(([0.0], unknowns[0::2], [0.0]))
        omega = np.concatenate(([0.0], unknowns[1::2], [self.problem.C_omega]))
        return F, omega

    @staticmethod
    def join(F: np.ndarray, omega: np.ndarray) -> np.ndarray:
        unknowns = np.empty(2 * (F.size - 2))
        unknowns[0::2] = F[1:-1]
        unknowns[1::2] = omega[1:-1]
        return unknowns

    def residual(self, unknowns: np.ndarray) -> np.ndarray:
        nu, h = self.problem.nu, self.problem.mesh.h
        F, omega = self.split(unknowns)
        x = self._x
        u = 1.0 - x ** 2
        dF = {order: op @ F for order, op in self._d.items()}
        dO = {order: self._d[order] @ omega for order in (1, 2)}

        first = h ** 4 * (nu * u ** 2 * dF[4] - 4.0 * nu * x * u * dF[3]
                          + u * (F * dF[3] + 3.0 * dF[1] * dF[2]) + 2.0 * omega * dO[1])
        first[1] = np.dot(self._slope_at_ground, F[:self._slope_at_ground.size])
        first[2] = (F[0] - 2.0 * F[1] + F[2]) - h ** 2 * self.problem.closure
        second = h ** 2 * (nu * u * dO[2] + F * dO[1])

        values = np.empty_like(unknowns)
        values[0::2] = first[1:-1]
        values[1::2] = second[1:-1]
        return values

    def exact_jacobian(self, unknowns: np.ndarray) -> sp.csr_matrix:
        """Blöcke nach (F, Ω), anschließend in die verschränkte Reihenfolge permutiert"""
        nu, h = self.problem.nu, self.problem.mesh.h
        F, omega = self.split(unknowns)
        x = self._x
        u = 1.0 - x ** 2
        d = self._d
        dF = {order: op @ F for order, op in d.items()}
        dO1 = d[1] @ omega
        diag = sp.diags

        first_F = h ** 4 * (diag(nu * u ** 2) @ d[4] - diag(4.0 * nu * x * u) @ d[3]
                            + diag(u) @ (diag(dF[3]) + diag(F) @ d[3]
                                         + 3.0 * diag(dF[2]) @ d[1] + 3.0 * diag(dF[1]) @ d[2]))
        first_O = h ** 4 * (2.0 * diag(dO1) + 2.0 * diag(omega) @ d[1])
        second_F = h ** 2 * diag(dO1)
        second_O = h ** 2 * (diag(nu * u) @ d[2] + diag(F) @ d[1])

        # Zeilen 1 und 2 tragen F'(0) = 0 und die closure-Bedingung
        keep = np.ones(x.size)
        keep[[1, 2]] = 0.0
        size = self._slope_at_ground.size
        rows = [1] * size + [2, 2, 2]
        cols = list(range(size)) + [0, 1, 2]
        data = list(self._slope_at_ground) + [1.0, -2.0, 1.0]
        conditions = sp.csr_matrix((data, (rows, cols)), shape=(x.size, x.size))
        first_F = diag(keep) @ first_F + conditions
        first_O = diag(keep) @ first_O

        inner = slice(1, -1)
        blocks = sp.bmat([
            [sp.csr_matrix(first_F)[inner, inner], sp.csr_matrix(first_O)[inner, inner]],
            [sp.csr_matrix(second_F)[inner, inner], sp.csr_matrix(second_O)[inner, inner]],
        ], format='csr')
        m = x.size - 2
        order = np.empty(2 * m, dtype=int)
        order[0::2] = np.arange(m)
        order[1::2] = m + np.arange(m)
        return blocks[order][:, order]

    def initial_guess(self) -> np.ndarray:
        """
        F = C1 √(x(1-x)) (1 - exp(-(x/δ)^2)), Ω = C_ω tanh(x/δ)

        mit C1 = sign(closure) √(2ν|closure|) und δ = (ν/|C1|)^(2/3).
        """
        nu, closure = self.problem.nu, self.problem.closure
        C1 = math.copysign(math.sqrt(2.0 * nu * abs(closure)), closure) if closure else 0.0
        delta = (nu / max(abs(C1), 1e-12)) ** (2.0 / 3.0)
        x = self._x
        F = C1 * np.sqrt(x * (1.0 - x)) * (1.0 - np.exp(-(x / delta) ** 2))
        omega = self.problem.C_omega * np.tanh(x / delta)
        omega[-1] = self.problem.C_omega
        return self.join(F, omega)

    def to_profile(self, unknowns: np.ndarray, metadata: Optional[Dict[str, Any]] = None) -> Profile:
        return serrin_profile(self.problem, *self.split(unknowns), metadata)


def serrin_profile(problem: ViscousProblem, F: np.ndarray, omega: np.ndarray,
                   metadata: Optional[Dict[str, Any]] = None) -> Profile:
    """Profil aus Knotenwerten, G = √(1-x^2) F'"""
    mesh = problem.mesh
    F_component = SampledComponent(mesh, F, 'F')
    meta = {
        'generator': GENERATOR,
        'nu': problem.nu,
        'k': problem.k,
        'closure': problem.closure,
        'h': mesh.h
    }
    meta.update(metadata or {})
    return Profile(Case.UPPER, problem.params, F_component, continuity_G_from_F(F_component, 1.0),
                   SampledComponent(mesh, omega, 'Omega'), meta)


def continuation_path(nu: float, start: float = 0.05, factor: float = 0.7) -> List[float]:
    """Geometrische Folge von start bis nu (einschließlich)"""
    if not 0 < factor < 1:
        raise ValidationError(f"continuation factor must lie in (0, 1), got {factor}")
    path = []
    current = start
    while current > nu * (1.0 + 1e-12):
        path.append(current)
        current *= factor
    path.append(nu)
    return path


def solve_serrin_b1(problem: ViscousProblem, continuation_start: float = 0.05,
                    continuation_factor: float = 0.7) -> Profile:
    """
    Löst Serrins System mit Fortsetzung in ν

    Jeder Schritt läuft auf dem Zielgitter, warm gestartet aus dem vorigen;
    ν * closure bleibt konstant.

    Raises:
        NonConvergenceError: mit dem ν des gescheiterten Schritts in der Meldung
    """
    product = problem.nu * problem.closure
    unknowns = None
    iterations = 0
    result = None
    for nu in continuation_path(problem.nu, continuation_start, continuation_factor):
        step = problem.with_nu(nu, product / nu)
        solver = ViscousSolver(step)
        guess = solver.initial_guess() if unknowns is None else unknowns
        try:
            result = solver.solve(guess)
        except NonConvergenceError as error:
            raise NonConvergenceError(f"continuation step nu={nu:g}: {error}",
                                      error.residual_norm, iterations + error.iterations)
        unknowns = result.unknowns
        iterations += result.iterations
        logger.debug(f"Continuation step nu={nu:g} converged")

    logger.info(f"Serrin system nu={problem.nu:g} (k={problem.k:g}) solved, "
                f"{iterations} Newton iterations in total")
    return ViscousSolver(problem).to_profile(unknowns, {
        'residual_norm': result.residual_norm,
        'iterations': iterations
    })


def _window_misfit(profile: Profile, window: Tuple[float, float]) -> float:
    mesh = profile.mesh
    x = mesh.nodes[(mesh.nodes >= window[0]) & (mesh.nodes <= window[1])]
    _, _, O = as_upper(profile).evaluate(x, order=0, strict=False)
    return float(np.mean((O[0] - profile.params.C_omega) ** 2))


def calibrate_closure(problem: ViscousProblem, window: Tuple[float, float] = (0.5, 0.95),
                      span: float = 10.0, continuation_start: float = 0.05,
                      continuation_factor: float = 0.7) -> float:
    """
    closure, der Ω auf window am nächsten an C_ω bringt

    Beschränkte Suche über log|closure| in [closure/span, closure*span],
    Vorzeichen wie beim Startwert.
    """
    sign = math.copysign(1.0, problem.closure) if problem.closure else 1.0
    centre = math.log(abs(problem.closure) if problem.closure else default_closure(problem.nu, problem.C_omega))

    def objective(log_closure: float) -> float:
        candidate = problem.with_nu(problem.nu, sign * math.exp(log_closure))
        try:
            profile = solve_serrin_b1(candidate, continuation_start, continuation_factor)
        except NonConvergenceError:
            return 1e6
        return _window_misfit(profile, window)

    result = optimize.minimize_scalar(objective, bounds=(centre - math.log(span), centre + math.log(span)),
                                      method='bounded', options={'xatol': 1e-3})
    closure = sign * math.exp(result.x)
    logger.info(f"Calibrated closure {closure:.6g} (misfit {result.fun:.3e})")
    return closure


def layer_size(profile: Profile, delta: float = 0.05, mesh: Optional[Mesh] = None) -> float:
    """
    x* = sup{x : |Ω(x) - C_ω| > δ|C_ω|} mit linearer Interpolation

    Returns:
        0.0, wenn Ω überall innerhalb der Schranke liegt

    Raises:
        ValidationError: Abweichung reicht bis x = 1 (kein Übergang)
    """
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    mesh = mesh or profile.mesh or Mesh(1000)
    C = profile.params.C_omega
    x = mesh.nodes
    _, _, O = as_upper(profile).evaluate(x, order=0, strict=False)
    deviation = np.abs(O[0] - C)
    threshold = delta * abs(C)
    above = np.flatnonzero(deviation > threshold)
    if above.size == 0:
        return 0.0
    last = above[-1]
    if last == x.size - 1:
        raise ValidationError(f"no layer edge: |Omega - C_omega| exceeds {threshold:g} up to x=1")
    d0, d1 = deviation[last], deviation[last + 1]
    weight = (d0 - threshold) / (d0 - d1)
    return float(x[last] + weight * (x[last + 1] - x[last]))


def fit_layer_slope(nus: Sequence[float], layer_xs: Sequence[float]) -> float:
    """Steigung von ln(x*) über ln(ν)"""
    nus = np.asarray(nus, dtype=float)
    layer_xs = np.asarray(layer_xs, dtype=float)
    if nus.size < 2 or np.ptp(np.log(nus)) == 0:
        raise ValidationError("slope fit needs at least two distinct viscosities")
    if np.any(layer_xs <= 0):
        raise ValidationError("layer sizes must be positive for a log-log fit")
    return float(stats.linregress(np.log(nus), np.log(layer_xs)).slope)


def check_nu_list(nu_list: Sequence[float]) -> np.ndarray:
    nus = np.asarray(sorted(nu_list, reverse=True), dtype=float)
    if nus.size < 4:
        raise ValidationError(f"layer scaling needs at least 4 viscosities, got {nus.size}")
    if math.log10(nus[0] / nus[-1]) < 1.0:
        raise ValidationError("viscosities must span at least one decade")
    return nus


def solve_layer_runs(nu_list: Sequence[float], C_omega: float = 1.0, newton: Optional[NewtonConfig] = None,
                     continuation_start: float = 0.05, continuation_factor: float = 0.7,
                     threads: int = 1) -> List[Tuple[float, Profile]]:
    """Unabhängige Läufe je ν, optional parallel"""
    newton = newton or NewtonConfig()

    def run(nu: float) -> Tuple[float, Profile]:
        problem = ViscousProblem(nu, C_omega, newton=newton)
        return nu, solve_serrin_b1(problem, continuation_start, continuation_factor)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(run, [float(nu) for nu in nu_list]))


def layer_scaling(nu_list: Sequence[float], delta: float = 0.05, C_omega: float = 1.0,
                  newton: Optional[NewtonConfig] = None, continuation_start: float = 0.05,
                  continuation_factor: float = 0.7,
                  threads: int = 1) -> Tuple[float, List[LayerMeasurement]]:
    """
    Grenzschicht-Experiment: x*(ν) messen und die Potenz anpassen

    Returns:
        (Steigung, Messungen)
    """
    nus = check_nu_list(nu_list)
    runs = solve_layer_runs(nus, C_omega, newton, continuation_start, continuation_factor, threads)
    measurements = [LayerMeasurement(nu, layer_size(profile, delta), delta) for nu, profile in runs]
    slope = fit_layer_slope([m.nu for m in measurements], [m.layer_x for m in measurements])
    logger.info(f"Layer scaling slope {slope:.4f} over {len(measurements)} viscosities")
    return slope, measurements


def delta_sensitivity(runs: Sequence[Tuple[float, Profile]], deltas: Sequence[float]) -> pd.DataFrame:
    """Steigung der Grenzschicht-Skalierung je Schwelle δ"""
    rows = []
    for delta in deltas:
        layer_xs = [layer_size(profile, delta) for _, profile in runs]
        rows.append({'delta': float(delta),
                     'slope': fit_layer_slope([nu for nu, _ in runs], layer_xs)})
    return pd.DataFrame(rows)
