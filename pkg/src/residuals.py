"""
Residuen der Bewegungsgleichungen

Enthält die Ausdrücke C_i, D_i in beiden Variablensätzen, die Kombinationen
dC1/dα + 2b C2 und dD1/dα + (1+b) D2, die mit der Kontinuität
substituierten Formen (b != 2), die reduzierten Gleichungssätze und ein
unabhängiges Orakel, das die vollen sphärischen Navier-Stokes-Gleichungen
mit zentralen Differenzen auswertet.

Alle Gleichungen werden als Liste von Summanden aufgebaut. Ein Bericht hält
die Summe (Residuum) und die Summe der Beträge (Termgröße); der gemeinsame
positive Vorfaktor (1-x^2)^k wird nur protokolliert.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import SingularPointError, ValidationError
from .model import Case, Mesh, Profile, VortexParams, as_lower, as_upper
from .utils.stacks import DerivativeStack

logger = logging.getLogger(__name__)


class EquationId(str, Enum):
    C3 = 'C3eq'
    C1C2 = 'C1C2eq'
    D3 = 'D3eq'
    D1D2 = 'D1D2eq'
    SERRIN_1 = 'SerrinSys1'
    SERRIN_2 = 'SerrinSys2'
    FULL_R = 'FullNS_R'
    FULL_ALPHA = 'FullNS_alpha'
    FULL_THETA = 'FullNS_theta'
    CONTINUITY = 'Continuity'
    B2_PRODUCT = 'B2_GOmega'
    B2_SWIRL = 'B2_Omega'
    B2_MERIDIONAL = 'B2_meridional'


class GoverningMode(str, Enum):
    INVISCID_REDUCED = 'inviscid-reduced'
    INVISCID_B2 = 'inviscid-b2'
    VISCOUS_B1 = 'viscous-b1'
    VISCOUS_SPLIT = 'viscous-split'
    VISCOUS_B2 = 'viscous-b2'

    @classmethod
    def select(cls, params: VortexParams) -> 'GoverningMode':
        """Gleichungssatz nach (b, ν)"""
        if params.nu == 0:
            return cls.INVISCID_B2 if params.b == 2 else cls.INVISCID_REDUCED
        if params.b == 1:
            return cls.VISCOUS_B1
        if params.b == 2:
            return cls.VISCOUS_B2
        return cls.VISCOUS_SPLIT


@dataclass
class ResidualReport:
    """
    Residuen einer Gleichung an einer Knotenmenge
    """
    equation_id: EquationId
    nodes: np.ndarray
    residuals: np.ndarray
    scale: np.ndarray = None     # Summe der Termbeträge
    prefactor: str = '1'

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)
        if self.scale is None:
            self.scale = np.zeros_like(self.residuals)
        self.scale = np.asarray(self.scale, dtype=float)
        if self.nodes.shape[0] != self.residuals.shape[0]:
            raise ValidationError("residual report arrays are not aligned")

    @property
    def sup_norm(self) -> float:
        if self.residuals.size == 0:
            return 0.0
        return float(np.max(np.abs(self.residuals)))

    @property
    def l2_norm(self) -> float:
        if self.residuals.size == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.residuals ** 2)))

    @property
    def relative(self) -> np.ndarray:
        """|Residuum| / (1 + Termgröße)"""
        return np.abs(self.residuals) / (1.0 + self.scale)

    @property
    def relative_sup(self) -> float:
        if self.residuals.size == 0:
            return 0.0
        return float(np.max(self.relative))

    def restricted(self, lower: float, upper: float) -> 'ResidualReport':
        """Nur Knoten mit lower <= x <= upper (eindimensionale Knoten)"""
        mask = (self.nodes >= lower - 1e-12) & (self.nodes <= upper + 1e-12)
        return ResidualReport(self.equation_id, self.nodes[mask], self.residuals[mask],
                              self.scale[mask], self.prefactor)

    def passes(self, tol: float, relative: bool = True) -> bool:
        value = self.relative_sup if relative else self.sup_norm
        return bool(value <= tol)

    def to_frame(self) -> pd.DataFrame:
        if self.nodes.ndim == 2:
            frame = pd.DataFrame({'r': self.nodes[:, 0], 'z': self.nodes[:, 1]})
        else:
            frame = pd.DataFrame({'x': self.nodes})
        frame['equation_id'] = self.equation_id.value
        frame['residual'] = self.residuals
        return frame

    def summary(self) -> Dict[str, object]:
        return {
            'equation_id': self.equation_id.value,
            'nodes': int(self.residuals.size),
            'sup_norm': self.sup_norm,
            'l2_norm': self.l2_norm,
            'relative_sup': self.relative_sup,
            'prefactor': self.prefactor
        }


def reports_to_frame(reports: Sequence[ResidualReport]) -> pd.DataFrame:
    return pd.concat([r.to_frame() for r in reports], ignore_index=True)


class Form(NamedTuple):
    """Vorfaktor und Summanden eines Ausdrucks"""
    prefactor: np.ndarray
    terms: List[np.ndarray]

    @property
    def bracket(self) -> np.ndarray:
        return np.sum(self.terms, axis=0)

    @property
    def value(self) -> np.ndarray:
        return self.prefactor * self.bracket

    @property
    def scale(self) -> np.ndarray:
        return np.sum(np.abs(self.terms), axis=0)


def _geometry(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = 1.0 - x ** 2
    return u, np.sqrt(u)


# ----------------------------------------------------------------------
# C_i und D_i
# ----------------------------------------------------------------------

def c_forms_upper(x, b, F: DerivativeStack, G: DerivativeStack, O: DerivativeStack) -> Tuple[Form, Form, Form]:
    u, s = _geometry(x)
    pre = u ** (-b)
    C1 = Form(pre, [-F[0] ** 2, -b * G[0] ** 2, -O[0] ** 2,
                    -F[0] * s * G[1], -b * x * F[0] * G[0] / s])
    C2 = Form(pre, [-b * x * F[0] ** 2 / s, -x * O[0] ** 2 / s,
                    -s * F[0] * F[1], (1 - b) * F[0] * G[0]])
    C3 = Form(pre, [(1 - b) * G[0] * O[0], -s * F[0] * O[1],
                    (1 - b) * x * F[0] * O[0] / s])
    return C1, C2, C3


def c_forms_lower(x, b, f: DerivativeStack, g: DerivativeStack, w: DerivativeStack) -> Tuple[Form, Form, Form]:
    u, s = _geometry(x)
    pre = 1.0 / u
    C1 = Form(pre, [-f[0] ** 2, -b * g[0] ** 2, -w[0] ** 2,
                    -s * f[0] * g[1], -x * f[0] * g[0] / s])
    C2 = Form(pre, [-x * f[0] ** 2 / s, -x * w[0] ** 2 / s,
                    -s * f[0] * f[1], (1 - b) * f[0] * g[0]])
    C3 = Form(pre, [(1 - b) * g[0] * w[0], -s * f[0] * w[1]])
    return C1, C2, C3


def d_forms_upper(x, b, F: DerivativeStack, G: DerivativeStack, O: DerivativeStack) -> Tuple[Form, Form, Form]:
    u, s = _geometry(x)
    pre = u ** (-b / 2)
    D1 = Form(pre, [u * G[2], -2 * (1 - b) * x * G[1], -(2 * u - b ** 2) * G[0] / u,
                    -2 * (1 - b) * x * F[0] / s, 2 * s * F[1]])
    D2 = Form(pre, [u * F[2], -2 * (1 - b) * x * F[1], -(1 - b ** 2) * F[0] / u,
                    -2 * b * x * G[0] / s, -2 * s * G[1]])
    D3 = Form(pre, [u * O[2], -2 * (1 - b) * x * O[1], -(1 - b ** 2) * O[0] / u])
    return D1, D2, D3


def d_forms_lower(x, b, f: DerivativeStack, g: DerivativeStack, w: DerivativeStack) -> Tuple[Form, Form, Form]:
    u, s = _geometry(x)
    pre = u ** -0.5
    D1 = Form(pre, [u * g[2], (1 / u - (2 - b) * (1 + b)) * g[0], 2 * s * f[1]])
    D2 = Form(pre, [u * f[2], -b * (1 - b) * f[0], -2 * x * g[0] / s, -2 * s * g[1]])
    D3 = Form(pre, [u * w[2], -b * (1 - b) * w[0]])
    return D1, D2, D3


def composite_forms_upper(x, b, F: DerivativeStack, G: DerivativeStack, O: DerivativeStack) -> Tuple[Form, Form]:
    """dC1/dα + 2b C2 und dD1/dα + (1+b) D2 in (F, G, Ω)"""
    u, s = _geometry(x)
    c = Form(u ** (-b), [
        2 * b * (1 - b) * (x / s) * F[0] ** 2,
        2 * b * b * (x / s) * G[0] ** 2,
        2 * s * (1 - b) * F[0] * F[1],
        2 * s * b * G[0] * G[1],
        2 * s * O[0] * O[1],
        u * F[1] * G[1],
        u * F[0] * G[2],
        b * (3 - 2 * b - 2 * (1 - 2 * b) * x ** 2) * F[0] * G[0] / u,
        b * x * F[1] * G[0],
        -(1 - 3 * b) * x * F[0] * G[1],
    ])
    d = Form(u ** (-(2 + b) / 2), [
        (1 - b) * (1 - b ** 2 - 2 * b * u) * F[0],
        -b ** 2 * (4 + b - 2 * x ** 2) * (x / s) * G[0],
        2 * (1 - b) ** 2 * x * u * F[1],
        (2 - 4 * b - b ** 2 - 2 * (1 - 3 * b + b ** 2) * x ** 2) * s * G[1],
        -u ** 2 * (1 - b) * F[2],
        u ** 2 * (4 - 3 * b) * (x / s) * G[2],
        -u ** 2 * s * G[3],
    ])
    return c, d


def composite_forms_lower(x, b, f: DerivativeStack, g: DerivativeStack, w: DerivativeStack) -> Tuple[Form, Form]:
    """dC1/dα + 2b C2 und dD1/dα + (1+b) D2 in (f, g, ω)"""
    u, s = _geometry(x)
    c = Form(1.0 / u, [
        2 * (1 - b) * (x / s) * f[0] ** 2,
        2 * b * (x / s) * g[0] ** 2,
        2 * (1 - b) * (x / s) * w[0] ** 2,
        2 * s * (1 - b) * f[0] * f[1],
        2 * s * b * g[0] * g[1],
        2 * s * w[0] * w[1],
        u * f[1] * g[1],
        u * f[0] * g[2],
        (1 + 2 * x ** 2 + 2 * b * (1 - b) * u) / u * f[0] * g[0],
        x * f[1] * g[0],
        2 * x * f[0] * g[1],
    ])
    d = Form(u ** -1.5, [
        -b * (1 - b ** 2) * u * f[0],
        (-3 - b * (1 + b) * u) * (x / s) * g[0],
        -(1 + b * (1 + b) * u) * s * g[1],
        -u ** 2 * (1 - b) * f[2],
        u ** 2 * (x / s) * g[2],
        -u ** 2 * s * g[3],
    ])
    return c, d


def substituted_forms_upper(x, b, F: DerivativeStack, O: DerivativeStack) -> Dict[str, Form]:
    """C3, D3 und die Kombinationen mit G aus der Kontinuität (b != 2)"""
    u, s = _geometry(x)
    kappa = 1.0 / (2 - b)
    q = (1 - b) * kappa
    return {
        'C3': Form(u ** (0.5 - b), [q * O[0] * F[1], q * O[0] * x * F[0] / u, -F[0] * O[1]]),
        'D3': Form(u ** (-1 - b / 2), [u ** 2 * O[2], -2 * (1 - b) * x * u * O[1],
                                       -(1 - b ** 2) * O[0]]),
        'C1C2': Form(kappa * u ** (0.5 - b), [
            u * (2 + b) * kappa * F[1] * F[2],
            u * F[0] * F[3],
            2 * (2 - b) * O[0] * O[1],
            -2 * (1 - b) * kappa * 2 * x * (1 + b * x ** 2) * F[0] ** 2 / u ** 2,
            -2 * (1 - b) * kappa * (b + (2 + 3 * b) * x ** 2) * F[0] * F[1] / u,
            -2 * (1 - b) * kappa * (2 + b) * x * F[1] ** 2,
            -2 * (1 - b) * kappa * (4 - b) * x * F[0] * F[2],
        ]),
        'D1D2': Form(-kappa * u ** (-2 - b / 2), [
            u ** 4 * F[4],
            -4 * (2 - b) * x * u ** 3 * F[3],
            -2 * (1 - b) * (3 + b - 2 * (3 - b) * x ** 2) * u ** 2 * F[2],
            -4 * b * (1 - b) * (2 + b - x ** 2) * x * u * F[1],
            -(1 - b) * (3 - b + b ** 2 + b ** 3 + 4 * b * (3 + b) * x ** 2 - 4 * b * x ** 4) * F[0],
        ]),
    }


def substituted_forms_lower(x, b, f: DerivativeStack, w: DerivativeStack) -> Dict[str, Form]:
    u, s = _geometry(x)
    kappa = 1.0 / (2 - b)
    q = (1 - b) * kappa
    return {
        'C3': Form(u ** -0.5, [q * f[1] * w[0], -f[0] * w[1]]),
        'D3': Form(u ** -0.5, [u * w[2], -b * (1 - b) * w[0]]),
        'C1C2': Form(kappa * u ** -0.5, [
            u * (2 + b) * kappa * f[1] * f[2],
            u * f[0] * f[3],
            2 * (2 - b) * w[0] * w[1],
            2 * (1 - b) * (2 - b) * x * f[0] ** 2 / u,
            2 * (1 - b) * (2 - b) * x * w[0] ** 2 / u,
            4 * (1 - b) * f[0] * f[1],
        ]),
        'D1D2': Form(-kappa * u ** -0.5, [
            u ** 2 * f[4],
            -4 * x * u * f[3],
            -2 * b * (1 - b) * u * f[2],
            b * (1 - b ** 2) * (2 - b) * f[0],
        ]),
    }


# ----------------------------------------------------------------------
# Auswertung an Punkten
# ----------------------------------------------------------------------

def _stacks(x, profile: Profile, case: Optional[Case]):
    case = case or profile.case
    source = as_upper(profile) if case == Case.UPPER else as_lower(profile)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x <= 0) | (x >= 1)):
        raise SingularPointError("appendix expressions are evaluated on the open interval (0, 1)")
    return x, case, source.evaluate(x, strict=False)


def _finite(x: np.ndarray, values: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    for value in values:
        bad = ~np.isfinite(value)
        if np.any(bad):
            raise SingularPointError(f"expression is singular at x={x[np.argmax(bad)]}",
                                     x=float(x[np.argmax(bad)]))
    return tuple(values)


def eval_C(x, profile: Profile, case: Optional[Case] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(C1, C2, C3) in der Form des gewählten Variablensatzes"""
    x, case, stacks = _stacks(x, profile, case)
    forms = c_forms_upper if case == Case.UPPER else c_forms_lower
    return _finite(x, [f.value for f in forms(x, profile.params.b, *stacks)])


def eval_D(x, profile: Profile, case: Optional[Case] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D1, D2, D3) in der Form des gewählten Variablensatzes"""
    x, case, stacks = _stacks(x, profile, case)
    forms = d_forms_upper if case == Case.UPPER else d_forms_lower
    return _finite(x, [f.value for f in forms(x, profile.params.b, *stacks)])


def eval_composites(x, profile: Profile, case: Optional[Case] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(dC1/dα + 2b C2, dD1/dα + (1+b) D2)"""
    x, case, stacks = _stacks(x, profile, case)
    forms = composite_forms_upper if case == Case.UPPER else composite_forms_lower
    return _finite(x, [f.value for f in forms(x, profile.params.b, *stacks)])


def eval_substituted(x, profile: Profile, case: Optional[Case] = None) -> Dict[str, np.ndarray]:
    """Substituierte Formen C3, D3, C1C2, D1D2 (nur b != 2)"""
    if profile.params.b == 2:
        raise ValidationError("substituted forms require b != 2")
    x, case, (first, _, third) = _stacks(x, profile, case)
    forms = substituted_forms_upper if case == Case.UPPER else substituted_forms_lower
    result = {name: form.value for name, form in forms(x, profile.params.b, first, third).items()}
    _finite(x, list(result.values()))
    return result


# ----------------------------------------------------------------------
# Gleichungssätze
# ----------------------------------------------------------------------

def _report(equation_id: EquationId, x: np.ndarray, terms: List[np.ndarray],
            prefactor: str = '1') -> ResidualReport:
    terms = np.asarray(terms, dtype=float)
    return ResidualReport(equation_id, x, terms.sum(axis=0), np.abs(terms).sum(axis=0), prefactor)


def _nodes(mesh: Optional[Mesh], nodes) -> np.ndarray:
    if nodes is not None:
        return np.atleast_1d(np.asarray(nodes, dtype=float))
    if mesh is None:
        raise ValidationError("either a mesh or explicit nodes are required")
    return mesh.interior


def euler_residuals(profile: Profile, mesh: Optional[Mesh] = None,
                    nodes=None) -> Tuple[ResidualReport, ResidualReport]:
    """
    Reduzierte Euler-Gleichungen in (f, Ω)

        f Ω' - q [f' + (2-b) x f/(1-x^2)] Ω = 0
        (1-x^2)[(2+b)/(2-b) f'f'' + f f'''] + 4(1-b) f f'
            + 2(1-b)(2-b) x f^2/(1-x^2) + 2(2-b)(1-x^2)^(1-b) Ω Ω' = 0

    Für b = 2 wird auf den b=2-Satz umgeleitet.
    """
    b = profile.params.b
    if b == 2:
        return euler_b2_residuals(profile, mesh, nodes)

    x = _nodes(mesh, nodes)
    u, _ = _geometry(x)
    q = (1 - b) / (2 - b)
    f, _, _ = as_lower(profile).evaluate(x, strict=False)
    _, _, O = as_upper(profile).evaluate(x, strict=False)

    first = _report(EquationId.C3, x, [
        f[0] * O[1],
        -q * f[1] * O[0],
        -q * (2 - b) * x * f[0] * O[0] / u,
    ], prefactor='-(1-x^2)^((1-b)/2)')
    second = _report(EquationId.C1C2, x, [
        u * (2 + b) / (2 - b) * f[1] * f[2],
        u * f[0] * f[3],
        4 * (1 - b) * f[0] * f[1],
        2 * (1 - b) * (2 - b) * x * f[0] ** 2 / u,
        2 * (2 - b) * u ** (1 - b) * O[0] * O[1],
    ], prefactor='(1-x^2)^(-1/2)/(2-b)')
    return first, second


def euler_b2_residuals(profile: Profile, mesh: Optional[Mesh] = None,
                       nodes=None) -> Tuple[ResidualReport, ResidualReport]:
    """
    Reibungsfreie Gleichungen für b = 2

        G Ω = 0
        2[(G^2)' + 4x G^2/(1-x^2)] + (Ω^2)' = 0
    """
    x = _nodes(mesh, nodes)
    u, _ = _geometry(x)
    _, G, O = as_upper(profile).evaluate(x, strict=False)
    product = _report(EquationId.B2_PRODUCT, x, [G[0] * O[0]])
    meridional = _report(EquationId.B2_MERIDIONAL, x, [
        4 * G[0] * G[1],
        8 * x * G[0] ** 2 / u,
        2 * O[0] * O[1],
    ])
    return product, meridional


def viscous_b2_residuals(profile: Profile, mesh: Optional[Mesh] = None,
                         nodes=None) -> Tuple[ResidualReport, ResidualReport, ResidualReport]:
    """
    Viskose Gleichungen für b = 2

        G Ω = 0
        (1-x^2)^2 Ω'' + 2x(1-x^2) Ω' + 3Ω = 0
        8x G^2/(1-x^2) + 2(G^2)' + (Ω^2)' = 0

    Für Ω ≡ C_ω bleibt in der zweiten Gleichung das Residuum 3 C_ω.
    """
    x = _nodes(mesh, nodes)
    u, _ = _geometry(x)
    _, G, O = as_upper(profile).evaluate(x, strict=False)
    product = _report(EquationId.B2_PRODUCT, x, [G[0] * O[0]])
    swirl = _report(EquationId.B2_SWIRL, x, [u ** 2 * O[2], 2 * x * u * O[1], 3 * O[0]])
    meridional = _report(EquationId.B2_MERIDIONAL, x, [
        8 * x * G[0] ** 2 / u,
        4 * G[0] * G[1],
        2 * O[0] * O[1],
    ])
    return product, swirl, meridional


def serrin_residuals(profile: Profile, nu: float, mesh: Optional[Mesh] = None,
                     nodes=None) -> Tuple[ResidualReport, ResidualReport]:
    """
    Serrins System für b = 1

        ν(1-x^2) F'''' - 4νx F''' + F F''' + 3F'F'' + 2ΩΩ'/(1-x^2) = 0
        ν(1-x^2) Ω'' + F Ω' = 0
    """
    x = _nodes(mesh, nodes)
    u, _ = _geometry(x)
    F, _, O = as_upper(profile).evaluate(x, strict=False)
    first = _report(EquationId.SERRIN_1, x, [
        nu * u * F[4],
        -4 * nu * x * F[3],
        F[0] * F[3],
        3 * F[1] * F[2],
        2 * O[0] * O[1] / u,
    ])
    second = _report(EquationId.SERRIN_2, x, [nu * u * O[2], F[0] * O[1]])
    return first, second


def continuity_residuals(profile: Profile, mesh: Optional[Mesh] = None,
                         nodes=None) -> ResidualReport:
    """(2-b) G - √(1-x^2) F' + (1-b) x F/√(1-x^2)"""
    b = profile.params.b
    x = _nodes(mesh, nodes)
    _, s = _geometry(x)
    F, G, _ = as_upper(profile).evaluate(x, strict=False)
    return _report(EquationId.CONTINUITY, x, [(2 - b) * G[0], -s * F[1], (1 - b) * x * F[0] / s])


def ns_residuals(profile: Profile, params: VortexParams, mesh: Optional[Mesh] = None,
                 nodes=None) -> List[ResidualReport]:
    """
    Viskose Residuen

    b = 1: Serrins System; b = 2: b=2-Satz; sonst getrennt C3, D3 und die
    beiden Kombinationen (plus Kontinuität), da die R-Potenzen verschieden sind.
    """
    if not params.nu > 0:
        raise ValidationError("ns_residuals requires nu > 0")
    b = params.b
    if b == 1:
        return list(serrin_residuals(profile, params.nu, mesh, nodes))
    if b == 2:
        return list(viscous_b2_residuals(profile, mesh, nodes))

    x = _nodes(mesh, nodes)
    F, G, O = as_upper(profile).evaluate(x, strict=False)
    _, _, C3 = c_forms_upper(x, b, F, G, O)
    _, _, D3 = d_forms_upper(x, b, F, G, O)
    c, d = composite_forms_upper(x, b, F, G, O)
    return [
        ResidualReport(EquationId.C3, x, C3.bracket, C3.scale, '(1-x^2)^(-b)'),
        ResidualReport(EquationId.D3, x, D3.bracket, D3.scale, '(1-x^2)^(-b/2)'),
        ResidualReport(EquationId.C1C2, x, c.bracket, c.scale, '(1-x^2)^(-b)'),
        ResidualReport(EquationId.D1D2, x, d.bracket, d.scale, '(1-x^2)^(-(2+b)/2)'),
        continuity_residuals(profile, mesh, x),
    ]


def governing_residuals(profile: Profile, params: Optional[VortexParams] = None,
                        mesh: Optional[Mesh] = None, nodes=None,
                        mode: Optional[GoverningMode] = None) -> List[ResidualReport]:
    """Residuen des zu (b, ν) passenden Gleichungssatzes"""
    params = params or profile.params
    mode = mode or GoverningMode.select(params)
    logger.debug(f"Residual mode {mode.value} for b={params.b}, nu={params.nu}")
    if mode == GoverningMode.INVISCID_REDUCED:
        return list(euler_residuals(profile, mesh, nodes))
    if mode == GoverningMode.INVISCID_B2:
        return list(euler_b2_residuals(profile, mesh, nodes))
    return ns_residuals(profile, params, mesh, nodes)


# ----------------------------------------------------------------------
# Druck und volles Feld
# ----------------------------------------------------------------------

def pressure_from_profile(R, x, profile: Profile, params: Optional[VortexParams] = None,
                          T: float = 0.0):
    """
    p = C1(α) / (2b R^(2b)) - ν D1(α) / ((1+b) R^(1+b)) + T
    """
    params = params or profile.params
    b = params.b
    R = np.asarray(R, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(R.shape, x_arr.shape)
    R_flat = np.broadcast_to(R, shape).ravel()
    x_flat = np.broadcast_to(x_arr, shape).ravel()

    upper = as_upper(profile)
    C1 = eval_C(x_flat, upper, Case.UPPER)[0]
    p = C1 / (2 * b * R_flat ** (2 * b)) + T
    if params.nu > 0:
        D1 = eval_D(x_flat, upper, Case.UPPER)[0]
        p = p - params.nu * D1 / ((1 + b) * R_flat ** (1 + b))
    p = p.reshape(shape)
    return float(p) if p.ndim == 0 else p


def _spherical_field(profile: Profile, params: VortexParams, R: np.ndarray, alpha: np.ndarray,
                     T: float) -> Tuple[np.ndarray, ...]:
    x = np.cos(alpha)
    r_b = (R * np.sin(alpha)) ** params.b
    F, G, O = profile.evaluate(x, order=0, strict=False)
    p = pressure_from_profile(R, x, profile, params, T)
    return G[0] / r_b, F[0] / r_b, O[0] / r_b, p


def fullfield_ns_residual(profile: Profile, params: Optional[VortexParams] = None,
                          r_range: Tuple[float, float] = (0.5, 1.5),
                          z_range: Tuple[float, float] = (0.5, 1.5),
                          n_r: int = 11, n_z: int = 11, spacing: float = 1e-3,
                          T: float = 0.0) -> List[ResidualReport]:
    """
    Unabhängiges Orakel: volle Navier-Stokes-Gleichungen in (R, α, θ)

    Geschwindigkeit und Druck werden auf einem (r, z)-Gitter aufgebaut, alle
    partiellen Ableitungen mit zentralen Differenzen der Schrittweite
    'spacing' (in R und α) genähert. Jedes Residuum wird durch
    max(1, |konvektiver Term|) geteilt.

    Returns:
        Berichte FullNS_R, FullNS_alpha, FullNS_theta und Continuity
    """
    params = params or profile.params
    if min(r_range[0], z_range[0]) < 5 * spacing:
        raise ValidationError(
            f"grid must stay {5 * spacing:g} away from axis and ground, got r>={r_range[0]}, z>={z_range[0]}"
        )
    upper = as_upper(profile)
    nu = params.nu
    d = spacing

    r, z = np.meshgrid(np.linspace(*r_range, n_r), np.linspace(*z_range, n_z))
    r, z = r.ravel(), z.ravel()
    R = np.hypot(r, z)
    alpha = np.arctan2(r, z)

    center = _spherical_field(upper, params, R, alpha, T)
    R_plus = _spherical_field(upper, params, R + d, alpha, T)
    R_minus = _spherical_field(upper, params, R - d, alpha, T)
    a_plus = _spherical_field(upper, params, R, alpha + d, T)
    a_minus = _spherical_field(upper, params, R, alpha - d, T)

    def d_R(i):
        return (R_plus[i] - R_minus[i]) / (2 * d)

    def d_RR(i):
        return (R_plus[i] - 2 * center[i] + R_minus[i]) / d ** 2

    def d_a(i):
        return (a_plus[i] - a_minus[i]) / (2 * d)

    def d_aa(i):
        return (a_plus[i] - 2 * center[i] + a_minus[i]) / d ** 2

    sin, cos = np.sin(alpha), np.cos(alpha)
    cot = cos / sin
    vR, va, vt, _ = center

    def laplacian(i):
        return d_RR(i) + 2 * d_R(i) / R + (d_aa(i) + cot * d_a(i)) / R ** 2

    conv_R = vR * d_R(0) + va / R * d_a(0) - (va ** 2 + vt ** 2) / R
    visc_R = laplacian(0) - 2 * vR / R ** 2 - 2 / (R ** 2 * sin) * (sin * d_a(1) + cos * va)
    res_R = conv_R + d_R(3) - nu * visc_R

    conv_a = vR * d_R(1) + va / R * d_a(1) + vR * va / R - vt ** 2 * cot / R
    visc_a = laplacian(1) + 2 / R ** 2 * d_a(0) - va / (R ** 2 * sin ** 2)
    res_a = conv_a + d_a(3) / R - nu * visc_a

    conv_t = vR * d_R(2) + va / R * d_a(2) + vt * vR / R + va * vt * cot / R
    visc_t = laplacian(2) - vt / (R ** 2 * sin ** 2)
    res_t = conv_t - nu * visc_t

    cont_terms = [d_R(0), 2 * vR / R, d_a(1) / R, cot * va / R]
    res_c = np.sum(cont_terms, axis=0)

    nodes = np.column_stack([r, z])
    reports = [
        ResidualReport(EquationId.FULL_R, nodes, res_R / np.maximum(1.0, np.abs(conv_R))),
        ResidualReport(EquationId.FULL_ALPHA, nodes, res_a / np.maximum(1.0, np.abs(conv_a))),
        ResidualReport(EquationId.FULL_THETA, nodes, res_t / np.maximum(1.0, np.abs(conv_t))),
        ResidualReport(EquationId.CONTINUITY, nodes,
                       res_c / np.maximum(1.0, np.sum(np.abs(cont_terms), axis=0))),
    ]
    for report in reports:
        logger.debug(f"Full-field {report.equation_id.value}: sup={report.sup_norm:.3e}")
    return reports
