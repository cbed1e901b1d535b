"""
Geschlossene Lösungen und Nichtexistenz-Zeugen

- triviale Rotation F = G = 0, Ω = C_ω
- reibungsfreie Familie für b = 1 samt Druck und Null-Isobare
- hypergeometrisches Ω des viskosen Falls und seine Grenzwertklasse
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import SingularPointError, ValidationError
from .model import Case, Component, Profile, VortexParams
from .utils.specfun import HyperParams, gauss_2f1, gauss_2f1_at_one, gauss_2f1_derivative
from .utils.stacks import DerivativeStack, one_minus_x2

logger = logging.getLogger(__name__)


class OmegaLimit(str, Enum):
    DIVERGES_TO_INFINITY = 'diverges-to-infinity'
    TENDS_TO_ZERO = 'tends-to-zero'
    FINITE_NONZERO = 'finite-nonzero'


@dataclass(frozen=True)
class OmegaLimitClass:
    """Verhalten von Ω(x) für x -> 1"""
    b: float
    classification: OmegaLimit
    gamma_factor: float   # 2F1(...; 1)


def trivial_solution(params: VortexParams) -> Profile:
    """F = G ≡ 0, Ω ≡ C_ω (für jedes b > 0 eine Euler-Lösung)"""
    return Profile(
        Case.UPPER, params,
        Component.zero('F'),
        Component.zero('G'),
        Component.constant(params.C_omega, 'Omega'),
        {'generator': 'trivial', 'C1': 0.0}
    )


def _b1_F(C1: float) -> Component:
    # F = C1 √(x(1-x))
    return Component(lambda x: DerivativeStack.power_of_quadratic(x, 0.0, 1.0, -1.0, 0.5) * C1,
                     name='F')


def _b1_G(C1: float) -> Component:
    # G = (C1/2)(1-2x) √(1+x) / √x
    def build(x: np.ndarray) -> DerivativeStack:
        linear = DerivativeStack.polynomial(x, (1.0, -2.0))
        root = DerivativeStack.power_of_quadratic(x, 1.0, 1.0, 0.0, 0.5)
        inverse_root = DerivativeStack.power_of_quadratic(x, 0.0, 1.0, 0.0, -0.5)
        return linear * root * inverse_root * (0.5 * C1)
    return Component(build, name='G')


def inviscid_b1(C1: float, C_omega: float) -> Profile:
    """
    Reibungsfreie Lösungsfamilie für b = 1

    F = C1 √(x(1-x)), G = C1 (1-2x) √(1+x) / (2√x), Ω ≡ C_ω.
    C1 = 0 liefert die triviale Lösung.
    """
    params = VortexParams(b=1.0, nu=0.0, C_omega=C_omega)
    if C1 == 0:
        return trivial_solution(params)
    return Profile(
        Case.UPPER, params,
        _b1_F(C1),
        _b1_G(C1),
        Component.constant(C_omega, 'Omega'),
        {'generator': 'analytic-b1', 'C1': float(C1)}
    )


def pressure_b1(R, x, C1: float, C_omega: float, T: float = 0.0):
    """p = -(C_ω^2 - C1^2 (1-x)) / (2 r^2) + T mit r^2 = R^2 (1-x^2)"""
    R = np.asarray(R, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(x >= 1.0):
        raise SingularPointError("pressure is singular on the axis x=1", x=1.0)
    r2 = R ** 2 * (1.0 - x ** 2)
    p = -(C_omega ** 2 - C1 ** 2 * (1.0 - x)) / (2.0 * r2) + T
    return float(p) if np.ndim(p) == 0 else p


def zero_isobar_x(C1: float, C_omega: float) -> Optional[float]:
    """
    Lage der Null-Isobare x* = 1 - (C_ω/C1)^2 für T = 0

    Returns:
        x* in [0, 1) oder None, wenn die Linie den Halbraum nicht trifft
    """
    if C1 == 0:
        raise ValidationError("zero isobar undefined for C1=0")
    x_star = 1.0 - (C_omega / C1) ** 2
    if 0.0 <= x_star < 1.0:
        return x_star
    logger.info(f"Zero isobar x*={x_star:.4f} lies outside [0, 1)")
    return None


def zero_isobar_opens_upward(C1: float, C_omega: float) -> bool:
    """Kegel mit positiver Steigung genau dann, wenn C1^2 > C_ω^2"""
    return C1 ** 2 > C_omega ** 2


def viscous_omega_hyper(b: float, C: float, x):
    """Ω(x) = C x (1-x^2)^((b-1)/2) 2F1((1-b)/2, b/2; 3/2; x^2)"""
    params = HyperParams.for_swirl(b)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0) | (xs >= 1)):
        raise ValidationError("viscous_omega_hyper requires 0 <= x < 1")
    values = np.array([C * xi * gauss_2f1(params, xi * xi) * (1.0 - xi * xi) ** ((b - 1.0) / 2.0)
                       for xi in xs])
    return float(values[0]) if np.ndim(x) == 0 else values


def viscous_omega_component(b: float, C: float) -> Component:
    """
    Ω aus viscous_omega_hyper als Komponente mit exakten Ableitungen
    """
    params = HyperParams.for_swirl(b)

    def build(x: np.ndarray) -> DerivativeStack:
        z = x * x
        H = np.array([[gauss_2f1_derivative(params, zi, n) for zi in z] for n in range(5)])
        # Y(x) = H(x^2)
        Y = np.array([
            H[0],
            2.0 * x * H[1],
            2.0 * H[1] + 4.0 * x ** 2 * H[2],
            12.0 * x * H[2] + 8.0 * x ** 3 * H[3],
            12.0 * H[2] + 48.0 * x ** 2 * H[3] + 16.0 * x ** 4 * H[4],
        ])
        omega = DerivativeStack.identity(x) * DerivativeStack(Y) * C
        return omega * one_minus_x2(x, (b - 1.0) / 2.0)

    return Component(build, name='Omega')


def omega_limit_class(b: float) -> OmegaLimitClass:
    """
    Klassifiziert lim_{x->1} Ω für die hypergeometrische Lösung

    Für 0 < b < 1 divergiert (1-x^2)^((b-1)/2), für b > 1 geht der Faktor
    gegen 0; der Gamma-Faktor ist endlich und verschwindet nur für b = 3, 5, ...
    """
    if b == 1:
        raise ValidationError("b=1 is the Serrin case, not a nonexistence witness")
    if not b > 0:
        raise ValidationError(f"b must be > 0, got {b}")
    factor = gauss_2f1_at_one(b)
    if b < 1:
        return OmegaLimitClass(b, OmegaLimit.DIVERGES_TO_INFINITY, factor)
    return OmegaLimitClass(b, OmegaLimit.TENDS_TO_ZERO, factor)


def omega_from_f(f: Component, b: float, C: float) -> Component:
    """ω = C f^((1-b)/(2-b)) aus der ersten reduzierten Euler-Gleichung"""
    if b == 2:
        raise ValidationError("omega_from_f undefined for b=2")
    q = (1.0 - b) / (2.0 - b)
    return f.map(lambda x, s: s.power(q) * C, name='omega')


def f_from_omega(omega: Component, b: float, C: float) -> Component:
    """Umkehrung von omega_from_f: f = (ω/C)^((2-b)/(1-b))"""
    if b in (1, 2):
        raise ValidationError(f"f_from_omega undefined for b={b}")
    if C == 0:
        raise ValidationError("f_from_omega requires C != 0")
    exponent = (2.0 - b) / (1.0 - b)
    return omega.map(lambda x, s: (s * (1.0 / C)).power(exponent), name='f')


def reverse(profile: Profile) -> Profile:
    """Umkehr des gesamten Geschwindigkeitsfeldes v -> -v"""
    reversed_profile = profile.scaled(-1.0)
    return reversed_profile.with_metadata(reversed=not profile.metadata.get('reversed', False))


def flip_swirl(profile: Profile) -> Profile:
    """Drehsinn umkehren: Ω -> -Ω"""
    return replace(profile, third=profile.third.scaled(-1.0))

