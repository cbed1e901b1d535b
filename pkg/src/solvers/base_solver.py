"""
Basis-Klasse für die Newton-Löser
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded

from ..config import NewtonConfig
from ..exceptions import NonConvergenceError, ValidationError

logger = logging.getLogger(__name__)

# relative Störung für die Differenzen-Jacobimatrix
JACOBIAN_STEP = 1.5e-8
# Residuen unterhalb dieses Vielfachen des Rundungsniveaus gelten als konvergiert
ROUNDOFF_FACTOR = 4.0
JACOBIANS = ('exact', 'finite-differences')


@dataclass
class NewtonResult:
    """Ergebnis eines Newton-Laufs"""
    unknowns: np.ndarray
    residual_norm: float
    iterations: int
    history: List[float] = field(default_factory=list)

    def to_dict(self):
        return {
            'residual_norm': self.residual_norm,
            'iterations': self.iterations,
            'history': list(self.history)
        }


class BaseSolver(ABC):
    """
    Abstrakte Basisklasse für gedämpfte Newton-Verfahren mit Bandstruktur

    Unterklassen liefern das Residuum, die Bandbreite und wahlweise eine
    analytische Jacobimatrix; Liniensuche und Abbruch stecken hier.
    """

    def __init__(self, name: str, newton: NewtonConfig = None):
        self.name = name
        self.newton = newton or NewtonConfig()

    @abstractmethod
    def residual(self, unknowns: np.ndarray) -> np.ndarray:
        """
        Residuum der diskreten Gleichungen

        Args:
            unknowns: Vektor der Unbekannten (ohne Randwerte)

        Returns:
            Residuenvektor gleicher Länge
        """
        pass

    @property
    @abstractmethod
    def bandwidth(self) -> Tuple[int, int]:
        """(untere, obere) Bandbreite der Jacobimatrix"""
        pass

    def admissible(self, unknowns: np.ndarray) -> bool:
        """Zulässigkeit eines Iterats"""
        return True

    def exact_jacobian(self, unknowns: np.ndarray) -> Optional[sp.spmatrix]:
        """Analytische Jacobimatrix; None fällt auf Differenzen zurück"""
        return None

    @staticmethod
    def _norm(values: np.ndarray) -> float:
        if not np.all(np.isfinite(values)):
            return float('inf')
        return float(np.max(np.abs(values))) if values.size else 0.0

    def to_banded(self, matrix: sp.spmatrix) -> np.ndarray:
        """Bandspeicherung ab[upper + i - j, j] = a[i, j] für solve_banded"""
        lower, upper = self.bandwidth
        matrix = sp.coo_matrix(matrix)
        offsets = matrix.row - matrix.col
        if np.any(offsets > lower) or np.any(-offsets > upper):
            raise ValueError(f"{self.name}: Jacobian entries outside the band {self.bandwidth}")
        banded = np.zeros((lower + upper + 1, matrix.shape[1]))
        np.add.at(banded, (upper + offsets, matrix.col), matrix.data)
        return banded

    def finite_difference_jacobian(self, unknowns: np.ndarray, base: np.ndarray) -> np.ndarray:
        """
        Jacobimatrix in Bandspeicherung aus spaltenweise gruppierten Differenzen

        Spalten im Abstand lower+upper+1 beeinflussen disjunkte Zeilen und
        werden gemeinsam gestört.
        """
        lower, upper = self.bandwidth
        n = unknowns.size
        width = lower + upper + 1
        banded = np.zeros((width, n))
        steps = JACOBIAN_STEP * np.maximum(1.0, np.abs(unknowns))

        for group in range(min(width, n)):
            columns = np.arange(group, n, width)
            shifted = unknowns.copy()
            shifted[columns] += steps[columns]
            delta = self.residual(shifted) - base
            for j in columns:
                first, last = max(0, j - upper), min(n, j + lower + 1)
                rows = np.arange(first, last)
                banded[upper + rows - j, j] = delta[rows] / steps[j]
        return banded

    def jacobian(self, unknowns: np.ndarray, base: np.ndarray) -> np.ndarray:
        if self.newton.jacobian not in JACOBIANS:
            raise ValidationError(f"jacobian must be one of {JACOBIANS}, got {self.newton.jacobian!r}")
        exact = self.exact_jacobian(unknowns) if self.newton.jacobian == 'exact' else None
        if exact is None:
            return self.finite_difference_jacobian(unknowns, base)
        return self.to_banded(exact)

    def roundoff_level(self, banded: np.ndarray, unknowns: np.ndarray) -> np.ndarray:
        """
        Rundungsniveau je Zeile, eps * (|J| |u|)

        Bei Residuen, die in den Unbekannten polynomial sind, schätzt das
        die Summe der Termbeträge einer Zeile nach oben ab.
        """
        upper = self.bandwidth[1]
        n = unknowns.size
        magnitude = np.abs(unknowns)
        level = np.zeros(n)
        for row in range(banded.shape[0]):
            shift = row - upper
            columns = np.arange(max(0, -shift), min(n, n - shift))
            level[columns + shift] += np.abs(banded[row, columns]) * magnitude[columns]
        return np.finfo(float).eps * level

    def _within_tolerance(self, values: np.ndarray, level: np.ndarray) -> bool:
        if not np.all(np.isfinite(values)):
            return False
        bound = np.maximum(self.newton.tol, ROUNDOFF_FACTOR * level)
        return bool(np.all(np.abs(values) <= bound))

    def _linear_solve(self, banded: np.ndarray, base: np.ndarray) -> np.ndarray:
        upper = self.bandwidth[1]
        try:
            if base.size == 1:
                pivot = banded[upper, 0]
                if pivot == 0 or not np.isfinite(pivot):
                    raise np.linalg.LinAlgError("zero pivot")
                return -base / pivot
            return solve_banded(self.bandwidth, banded, -base)
        except (np.linalg.LinAlgError, ValueError, IndexError) as error:
            raise NonConvergenceError(f"{self.name}: singular Jacobian ({error})",
                                      self._norm(base), 0)

    def _newton_step(self, unknowns: np.ndarray, base: np.ndarray) -> np.ndarray:
        return self._linear_solve(self.jacobian(unknowns, base), base)

    def _line_search(self, unknowns: np.ndarray, step: np.ndarray,
                     norm: float) -> Tuple[np.ndarray, np.ndarray, float]:
        scale = 1.0
        for _ in range(self.newton.max_halvings + 1):
            candidate = unknowns + scale * step
            if self.admissible(candidate):
                values = self.residual(candidate)
                candidate_norm = self._norm(values)
                if candidate_norm < norm:
                    return candidate, values, candidate_norm
            scale *= 0.5
        return None, None, norm

    def solve(self, guess: np.ndarray) -> NewtonResult:
        """
        Gedämpftes Newton-Verfahren

        Konvergiert, sobald jede Zeile unter tol oder unter ihrem
        Rundungsniveau liegt. Danach folgt ein weiterer Schritt, der nur
        übernommen wird, wenn er das Residuum nicht vergrößert.

        Raises:
            NonConvergenceError: max_iter erreicht oder Liniensuche erfolglos
        """
        unknowns = np.array(guess, dtype=float)
        if not self.admissible(unknowns):
            raise NonConvergenceError(f"{self.name}: inadmissible initial guess")
        values = self.residual(unknowns)
        norm = self._norm(values)
        history = [norm]
        banded = None

        for iteration in range(1, self.newton.max_iter + 1):
            if norm <= self.newton.tol:
                break
            banded = self.jacobian(unknowns, values)
            if self._within_tolerance(values, self.roundoff_level(banded, unknowns)):
                break
            step = self._linear_solve(banded, values)
            candidate, candidate_values, candidate_norm = self._line_search(unknowns, step, norm)
            if candidate is None:
                raise NonConvergenceError(
                    f"{self.name}: line search failed at iteration {iteration} (residual {norm:.3e})",
                    norm, iteration
                )
            unknowns, values, norm = candidate, candidate_values, candidate_norm
            banded = None
            history.append(norm)
            logger.debug(f"{self.name}: iteration {iteration}, residual {norm:.3e}")
        else:
            if norm > self.newton.tol:
                banded = self.jacobian(unknowns, values)
                if not self._within_tolerance(values, self.roundoff_level(banded, unknowns)):
                    raise NonConvergenceError(
                        f"{self.name}: no convergence after {self.newton.max_iter} iterations "
                        f"(residual {norm:.3e})", norm, self.newton.max_iter
                    )

        iterations = len(history) - 1
        # Politur
        try:
            if banded is None:
                banded = self.jacobian(unknowns, values)
            candidate = unknowns + self._linear_solve(banded, values)
            if self.admissible(candidate):
                candidate_norm = self._norm(self.residual(candidate))
                if candidate_norm <= norm:
                    unknowns, norm = candidate, candidate_norm
        except NonConvergenceError:
            pass

        logger.info(f"{self.name}: converged in {iterations} iterations, residual {norm:.3e}")
        return NewtonResult(unknowns, norm, iterations, history)
