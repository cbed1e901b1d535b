"""
Kerntypen: Parameter, Gitter, Profile

Ein Profil ist ein Tripel (F, G, Ω) oder (f, g, ω) über x = cos α ∈ (0, 1).
Jede Komponente liefert an beliebigen x einen Ableitungsstapel bis zur
vierten Ordnung, entweder exakt (geschlossene Form) oder aus Gitterwerten
über Finite Differenzen.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .exceptions import IntegrationError, SingularPointError, ValidationError
from .utils.finite_differences import FiniteDifferences
from .utils.stacks import ORDERS, DerivativeStack, one_minus_x2

logger = logging.getLogger(__name__)

NODE_ATOL = 1e-12


@dataclass(frozen=True)
class VortexParams:
    """
    Modellkonstanten
    """
    b: float
    nu: float = 0.0
    C_omega: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValidationError(f"b must be > 0, got {self.b}")
        if not self.nu >= 0:
            raise ValidationError(f"nu must be >= 0, got {self.nu}")
        if self.C_omega == 0:
            raise ValidationError("C_omega must be nonzero")

    @property
    def kappa(self) -> float:
        """1/(2-b)"""
        return 1.0 / (2.0 - self.b)

    @property
    def q(self) -> float:
        """(1-b)/(2-b)"""
        return (1.0 - self.b) / (2.0 - self.b)

    def to_dict(self) -> Dict[str, Any]:
        return {'b': self.b, 'nu': self.nu, 'C_omega': self.C_omega}


@dataclass(frozen=True)
class Mesh:
    """
    Gleichmäßiges Gitter x_i = i h auf [0, 1]
    """
    n: int  # Anzahl Intervalle

    def __post_init__(self):
        if self.n < 6:
            raise ValidationError(f"mesh needs at least 6 intervals, got {self.n}")

    @classmethod
    def from_step(cls, h: float) -> 'Mesh':
        if not 0 < h < 1:
            raise ValidationError(f"step h must lie in (0, 1), got {h}")
        n = int(round(1.0 / h))
        if abs(n * h - 1.0) > 1e-9:
            raise ValidationError(f"1/h must be an integer, got h={h}")
        return cls(n)

    @classmethod
    def with_max_step(cls, h_max: float) -> 'Mesh':
        """Feinstes Gitter mit h <= h_max"""
        if not h_max > 0:
            raise ValidationError(f"step must be positive, got {h_max}")
        return cls(max(6, int(math.ceil(1.0 / h_max - 1e-9))))

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    def trimmed(self, fraction: float) -> np.ndarray:
        """Innere Knoten mit fraction <= x <= 1 - fraction"""
        x = self.interior
        return x[(x >= fraction - NODE_ATOL) & (x <= 1.0 - fraction + NODE_ATOL)]


class Case(str, Enum):
    UPPER = 'upper'   # (F, G, Ω)
    LOWER = 'lower'   # (f, g, ω)


class Kind(str, Enum):
    CLOSED_FORM = 'closed-form'
    SAMPLED = 'sampled'


class Component:
    """
    Eine Profilkomponente als Abbildung x -> DerivativeStack
    """

    def __init__(self, fn: Callable[[np.ndarray], DerivativeStack],
                 mesh: Optional[Mesh] = None, name: str = ''):
        self._fn = fn
        self.mesh = mesh
        self.name = name

    @property
    def kind(self) -> Kind:
        return Kind.SAMPLED if self.mesh is not None else Kind.CLOSED_FORM

    def stack(self, x) -> DerivativeStack:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self._fn(x)

    def __call__(self, x) -> np.ndarray:
        return self.stack(x).value

    # Konstruktoren
    @classmethod
    def constant(cls, value: float, name: str = '') -> 'Component':
        return cls(lambda x: DerivativeStack.constant(x, value), name=name)

    @classmethod
    def zero(cls, name: str = '') -> 'Component':
        return cls.constant(0.0, name)

    @classmethod
    def from_samples(cls, mesh: Mesh, values: Sequence[float], name: str = '') -> 'SampledComponent':
        return SampledComponent(mesh, values, name)

    # Komposition
    def map(self, fn: Callable[[np.ndarray, DerivativeStack], DerivativeStack],
            name: str = '') -> 'Component':
        """Neue Komponente fn(x, self.stack(x))"""
        return Component(lambda x: fn(x, self.stack(x)), self.mesh, name or self.name)

    @staticmethod
    def combine(fn: Callable[..., DerivativeStack], *components: 'Component',
                name: str = '') -> 'Component':
        """Neue Komponente fn(x, *stacks) aus mehreren Komponenten"""
        mesh = next((c.mesh for c in components if c.mesh is not None), None)
        return Component(lambda x: fn(x, *[c.stack(x) for c in components]), mesh, name)

    def scaled(self, factor: float) -> 'Component':
        return self.map(lambda x, s: s * factor)

    def derivative(self) -> 'Component':
        return self.map(lambda x, s: s.derivative(), name=f"{self.name}'")


class SampledComponent(Component):
    """
    Komponente aus Gitterwerten

    Ableitungen stammen aus den Stencils in FiniteDifferences; zwischen den
    Knoten wird jede Ordnung mit einem kubischen Spline interpoliert.
    """

    def __init__(self, mesh: Mesh, values: Sequence[float], name: str = ''):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n + 1,):
            raise ValidationError(f"expected {mesh.n + 1} samples, got {values.shape}")
        self.values = values
        self.rows = FiniteDifferences.derivative_rows(values, mesh.h)
        self._splines: Dict[int, Optional[CubicSpline]] = {}
        super().__init__(self._evaluate, mesh, name)

    def _spline(self, order: int) -> Optional[CubicSpline]:
        if order not in self._splines:
            row = self.rows[order]
            finite = np.isfinite(row)
            if finite.sum() < 4:
                self._splines[order] = None
            else:
                self._splines[order] = CubicSpline(self.mesh.nodes[finite], row[finite])
        return self._splines[order]

    def _evaluate(self, x: np.ndarray) -> DerivativeStack:
        n = self.mesh.n
        position = x * n
        index = np.clip(np.rint(position).astype(int), 0, n)
        on_node = np.abs(position - index) <= NODE_ATOL * n

        data = np.full((ORDERS, x.size), np.nan)
        data[:, on_node] = self.rows[:, index[on_node]]
        off = ~on_node
        if np.any(off):
            for order in range(ORDERS):
                spline = self._spline(order)
                if spline is not None:
                    data[order, off] = spline(x[off])
        return DerivativeStack(data)


@dataclass(frozen=True)
class Profile:
    """
    Lösungstripel in Groß- oder Kleinschreibung
    """
    case: Case
    params: VortexParams
    first: Component    # F bzw. f
    second: Component   # G bzw. g
    third: Component    # Ω bzw. ω
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def components(self) -> Tuple[Component, Component, Component]:
        return self.first, self.second, self.third

    @property
    def kind(self) -> Kind:
        if any(c.kind == Kind.SAMPLED for c in self.components):
            return Kind.SAMPLED
        return Kind.CLOSED_FORM

    @property
    def mesh(self) -> Optional[Mesh]:
        return next((c.mesh for c in self.components if c.mesh is not None), None)

    @property
    def names(self) -> Tuple[str, str, str]:
        return ('F', 'G', 'Omega') if self.case == Case.UPPER else ('f', 'g', 'omega')

    def evaluate(self, x, order: int = ORDERS - 1,
                 strict: bool = True) -> Tuple[DerivativeStack, DerivativeStack, DerivativeStack]:
        """
        Ableitungsstapel aller drei Komponenten

        Args:
            x: Auswertungspunkte
            order: höchste benötigte Ordnung (für die Polprüfung)
            strict: SingularPointError statt nicht-endlicher Werte

        Returns:
            Drei Stapel in der Reihenfolge (F, G, Ω) bzw. (f, g, ω)
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        stacks = tuple(c.stack(x) for c in self.components)
        if strict:
            for name, stack in zip(self.names, stacks):
                finite = stack.is_finite(order)
                if not np.all(finite):
                    bad = float(x[np.argmin(finite)])
                    raise SingularPointError(f"{name} is singular at x={bad}", x=bad)
        return stacks

    def with_metadata(self, **metadata) -> 'Profile':
        merged = dict(self.metadata)
        merged.update(metadata)
        return replace(self, metadata=merged)

    def scaled(self, factor: float) -> 'Profile':
        """Alle Komponenten mit einem gemeinsamen Faktor (Euler-Gleichungen sind homogen)"""
        return replace(self, first=self.first.scaled(factor),
                       second=self.second.scaled(factor), third=self.third.scaled(factor))


def _factor(b: float, exponent_sign: float) -> Callable[[np.ndarray], DerivativeStack]:
    return lambda x: one_minus_x2(x, exponent_sign * (1.0 - b) / 2.0)


def _convert(profile: Profile, target: Case, sign: float) -> Profile:
    factor = _factor(profile.params.b, sign)
    names = ('f', 'g', 'omega') if target == Case.LOWER else ('F', 'G', 'Omega')
    first, second, third = (
        c.map(lambda x, s: s * factor(x), name=n) for c, n in zip(profile.components, names)
    )
    return Profile(target, profile.params, first, second, third, dict(profile.metadata))


def to_lowercase(profile: Profile) -> Profile:
    """f = F (1-x^2)^((1-b)/2), ebenso g und ω"""
    if profile.case != Case.UPPER:
        raise ValidationError("to_lowercase expects an upper-case profile")
    return _convert(profile, Case.LOWER, 1.0)


def to_uppercase(profile: Profile) -> Profile:
    """F = f (1-x^2)^((b-1)/2), ebenso G und Ω"""
    if profile.case != Case.LOWER:
        raise ValidationError("to_uppercase expects a lower-case profile")
    return _convert(profile, Case.UPPER, -1.0)


def as_upper(profile: Profile) -> Profile:
    return profile if profile.case == Case.UPPER else to_uppercase(profile)


def as_lower(profile: Profile) -> Profile:
    return profile if profile.case == Case.LOWER else to_lowercase(profile)


def _check_continuity(b: float) -> None:
    if b == 2:
        raise ValidationError("continuity degenerate for b=2: G is not determined by F")


def continuity_g_from_f(f: Component, b: float) -> Component:
    """(2-b) g = √(1-x^2) f'"""
    _check_continuity(b)
    kappa = 1.0 / (2.0 - b)
    return f.map(lambda x, s: one_minus_x2(x, 0.5) * s.derivative() * kappa, name='g')


def continuity_G_from_F(F: Component, b: float) -> Component:
    """(2-b) G = √(1-x^2) F' - (1-b) x F / √(1-x^2)"""
    _check_continuity(b)
    kappa = 1.0 / (2.0 - b)

    def build(x: np.ndarray, s: DerivativeStack) -> DerivativeStack:
        root = one_minus_x2(x, 0.5)
        inverse_root = one_minus_x2(x, -0.5)
        xs = DerivativeStack.identity(x)
        return (root * s.derivative() - xs * s * inverse_root * (1.0 - b)) * kappa

    return F.map(build, name='G')


def _flux_sampled(g: Component) -> float:
    # g stückweise linear, exakt gegen 1/√(1-x^2) integriert
    mesh = g.mesh
    x = mesh.nodes
    values = np.array(g(x), dtype=float)
    finite = np.isfinite(values)
    if finite.sum() < 3:
        raise IntegrationError("too few finite samples for the flux integral")
    if not np.all(finite):
        values = np.interp(x, x[finite], values[finite])
        # Randwerte linear extrapolieren
        if not finite[0]:
            values[0] = 2.0 * values[1] - values[2]
        if not finite[-1]:
            values[-1] = 2.0 * values[-2] - values[-3]

    x0, x1 = x[:-1], x[1:]
    v0, v1 = values[:-1], values[1:]
    slope = (v1 - v0) / (x1 - x0)
    intercept = v0 - slope * x0
    # ∫ (a + b x)/√(1-x^2) dx = a arcsin x - b √(1-x^2)
    arcsin = np.arcsin(x1) - np.arcsin(x0)
    root = np.sqrt(1.0 - x1 ** 2) - np.sqrt(1.0 - x0 ** 2)
    return float(np.sum(intercept * arcsin - slope * root))


def flux_integral(g: Component, tol: float = 1e-8) -> float:
    """
    Integral ∫_0^1 g(x)/√(1-x^2) dx (kein Quellfluss am Boden)

    Geschlossene Formen über adaptive Quadratur mit algebraischem Gewicht an
    x=1, Gitterprofile über exakte Integration des linearen Interpolanten.
    """
    if g.kind == Kind.SAMPLED:
        return _flux_sampled(g)

    # g wird nur für x < 1 ausgewertet, am Endpunkt gibt 0 * (1-x^2)^k sonst NaN
    below_one = float(np.nextafter(1.0, 0.0))

    def lower(x: float) -> float:
        return float(g(x)[0]) / math.sqrt(1.0 - x * x)

    def upper(x: float) -> float:
        return float(g(min(x, below_one))[0]) / math.sqrt(1.0 + x)

    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            left, left_err = integrate.quad(lower, 0.0, 0.5, epsabs=tol, epsrel=tol, limit=200)
            right, right_err = integrate.quad(upper, 0.5, 1.0, weight='alg', wvar=(0.0, -0.5),
                                              epsabs=tol, epsrel=tol, limit=200)
        except integrate.IntegrationWarning as error:
            raise IntegrationError(f"flux integral did not converge: {error}")

    logger.debug(f"flux integral {left + right:.3e} (error estimate {left_err + right_err:.1e})")
    return left + right


def profile_flux(profile: Profile, tol: float = 1e-8) -> float:
    """
    Quellfluss ∫_0^1 g/√(1-x^2) dx eines Profils

    Für Gitterprofile gilt mit (2-b) g = √(1-x^2) f' exakt
    (f(1) - f(0)) / (2-b); ob g zu f passt, prüft continuity_residuals.
    Geschlossene Formen gehen über flux_integral.
    """
    lower = as_lower(profile)
    if profile.kind == Kind.CLOSED_FORM:
        return flux_integral(lower.second, tol)
    b = profile.params.b
    _check_continuity(b)
    ends = np.asarray(lower.first(np.array([0.0, 1.0])), dtype=float)
    if not np.all(np.isfinite(ends)):
        logger.warning("f is not finite at an end point, integrating the sampled g instead")
        return flux_integral(lower.second, tol)
    return float((ends[1] - ends[0]) / (2.0 - b))


def stream_function(R, x, profile: Profile):
    """Ψ = R^(2-b) f(x)"""
    lower = as_lower(profile)
    R = np.asarray(R, dtype=float)
    f = lower.first(np.asarray(x, dtype=float).ravel()).reshape(np.shape(x))
    return R ** (2.0 - profile.params.b) * f


def x_from_cylindrical(r, z):
    """x = cos α = z / √(r^2 + z^2)"""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    radius = np.hypot(r, z)
    if np.any(radius == 0):
        raise SingularPointError("direction undefined at the origin")
    result = z / radius
    return float(result) if result.ndim == 0 else result


def sample_profile(profile: Profile, mesh: Mesh) -> Dict[str, np.ndarray]:
    """
    Gitterwerte (x, F, G, Omega); Polstellen werden NaN
    """
    upper = as_upper(profile)
    x = mesh.nodes
    stacks = upper.evaluate(x, order=0, strict=False)
    samples = {'x': x}
    for name, stack in zip(('F', 'G', 'Omega'), stacks):
        values = np.array(stack.value, dtype=float)
        values[~np.isfinite(values)] = np.nan
        samples[name] = values
    poles = int(sum(np.isnan(samples[n]).sum() for n in ('F', 'G', 'Omega')))
    if poles:
        logger.warning(f"{poles} endpoint pole(s) replaced by NaN while sampling")
    return samples


def sampled_profile(params: VortexParams, mesh: Mesh, F: Sequence[float], G: Sequence[float],
                    Omega: Sequence[float], metadata: Optional[Dict[str, Any]] = None) -> Profile:
    """Großbuchstaben-Profil aus Gitterwerten"""
    return Profile(
        Case.UPPER, params,
        SampledComponent(mesh, F, 'F'),
        SampledComponent(mesh, G, 'G'),
        SampledComponent(mesh, Omega, 'Omega'),
        dict(metadata or {})
    )
