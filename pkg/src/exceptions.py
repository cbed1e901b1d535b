"""
Fehlerklassen für den Serrin Vortex Solver

Jede Klasse trägt den Exit-Code, den die CLI beim Abbruch zurückgibt.
"""

from typing import Any, List, Optional


class VortexError(Exception):
    """Basisklasse für alle Fehler des Pakets"""
    exit_code: int = 1


class ValidationError(VortexError):
    """Ungültige Parameter oder Eingabedaten"""
    exit_code = 2


class SingularPointError(ValidationError):
    """Auswertung an einer Polstelle (Achse, Boden oder x=1)"""

    def __init__(self, message: str, x: Optional[float] = None):
        super().__init__(message)
        self.x = x


class SeriesConvergenceError(VortexError):
    """Hypergeometrische Reihe bricht nach dem Term-Limit nicht ab"""
    exit_code = 3


class IntegrationError(VortexError):
    """Adaptive Quadratur konvergiert nicht"""
    exit_code = 3


class NonConvergenceError(VortexError):
    """Newton-Verfahren erreicht die Toleranz nicht"""
    exit_code = 3

    def __init__(self, message: str, residual_norm: float = float('nan'), iterations: int = 0):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class VerificationError(VortexError):
    """Residuen liegen über den Schwellwerten"""
    exit_code = 4

    def __init__(self, message: str, reports: Optional[List[Any]] = None):
        super().__init__(message)
        self.reports = reports or []


class PersistenceError(VortexError):
    """Lesen oder Schreiben von Dateien fehlgeschlagen"""
    exit_code = 5
