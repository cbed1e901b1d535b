"""
Physikalische Felder aus Profilen

Geschwindigkeit v_R = G/r^b, v_α = F/r^b, v_θ = Ω/r^b mit r = R sin α und
x = cos α, Druck, Rayleigh-Diskriminante, Stromlinien und die Potenz der
Geschwindigkeit in r.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .analytic import pressure_b1
from .exceptions import SingularPointError, ValidationError
from .model import Mesh, Profile, VortexParams, as_upper, stream_function
from .residuals import pressure_from_profile

logger = logging.getLogger(__name__)

# maximale Halbierungen des Zeitschritts pro Stromlinienschritt
MAX_STEP_HALVINGS = 30
# Schrittlänge relativ zum Abstand von Achse und Boden
CELL_FRACTION = 0.1


@dataclass
class FieldGrid:
    """
    Gitterwerte auf einem (r, z)-Fenster
    """
    quantity: str
    r: np.ndarray
    z: np.ndarray
    values: Dict[str, np.ndarray]

    def __post_init__(self):
        if np.any(self.r <= 0) or np.any(self.z <= 0):
            raise ValidationError("field grids must exclude the axis r=0 and the ground z=0")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.r.shape

    def minimum(self, key: str = 'value') -> float:
        return float(np.nanmin(self.values[key]))

    def maximum(self, key: str = 'value') -> float:
        return float(np.nanmax(self.values[key]))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({'r': self.r.ravel(), 'z': self.z.ravel()})
        for key, values in self.values.items():
            frame[key] = values.ravel()
        return frame


@dataclass
class Streamline:
    """Polygonzug einer Stromlinie in kartesischen Koordinaten"""
    start: Tuple[float, float, float]
    dt: float
    t: np.ndarray
    points: np.ndarray
    stop_reason: str = ''

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def radius_drift(self) -> float:
        return float(np.max(np.abs(self.radii - self.radii[0])))

    def revolutions(self) -> float:
        """Anzahl der Umläufe um die Achse"""
        theta = np.unwrap(np.arctan2(self.points[:, 1], self.points[:, 0]))
        return float(abs(theta[-1] - theta[0]) / (2.0 * math.pi))

    def descent(self) -> float:
        return float(self.points[0, 2] - self.points[-1, 2])

    def psi_drift(self, profile: Profile) -> float:
        """max |Ψ - Ψ(Start)| / |Ψ(Start)| entlang der Bahn"""
        r = self.radii
        z = self.points[:, 2]
        R = np.hypot(r, z)
        psi = stream_function(R, z / R, profile)
        reference = abs(psi[0])
        spread = float(np.max(np.abs(psi - psi[0])))
        if reference == 0.0:
            return spread
        return spread / reference

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.t, 'x': self.points[:, 0],
                             'y': self.points[:, 1], 'z': self.points[:, 2]})


@dataclass
class StabilityReport:
    """Minimum der Rayleigh-Diskriminante über einem Gitter"""
    b: float
    min_phi: float
    tol: float
    n_points: int
    stable: bool = field(init=False)

    def __post_init__(self):
        self.stable = bool(self.min_phi >= -self.tol)

    @property
    def verdict(self) -> str:
        return 'Stable' if self.stable else 'Unstable'

    def to_dict(self):
        return {'b': self.b, 'min_phi': self.min_phi, 'tol': self.tol,
                'n_points': self.n_points, 'verdict': self.verdict}


def _grid(r_range: Tuple[float, float], z_range: Tuple[float, float], n_r: int,
          n_z: int) -> Tuple[np.ndarray, np.ndarray]:
    if min(r_range[0], z_range[0]) <= 0:
        raise ValidationError("grid windows must start strictly above the axis and the ground")
    if n_r < 2 or n_z < 2:
        raise ValidationError("grids need at least two points per direction")
    return np.meshgrid(np.linspace(*r_range, n_r), np.linspace(*z_range, n_z))


def spherical_velocity(profile: Profile, r, z) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(v_R, v_α, v_θ) an Punkten (r, z) mit r > 0, z >= 0"""
    r, z = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(z, dtype=float))
    if np.any(r <= 0):
        raise SingularPointError("velocity is singular on the axis r=0")
    x = (z / np.hypot(r, z)).ravel()
    F, G, O = as_upper(profile).evaluate(x, order=0)
    scale = (r ** profile.params.b).ravel()
    return tuple((stack[0] / scale).reshape(r.shape) for stack in (G, F, O))


def velocity_at(profile: Profile, point: Tuple[float, float],
                spherical: bool = False) -> Tuple[float, float, float]:
    """
    Geschwindigkeit an einem Punkt

    Args:
        point: (r, z) oder bei spherical=True (R, α)

    Returns:
        (v_R, v_α, v_θ)
    """
    if spherical:
        R, alpha = point
        if R <= 0:
            raise SingularPointError("velocity is singular at the origin")
        r, z = R * math.sin(alpha), R * math.cos(alpha)
    else:
        r, z = point
    if r == 0 and z == 0:
        raise SingularPointError("velocity is singular at the origin")
    return tuple(float(v) for v in spherical_velocity(profile, r, z))


def to_cartesian(v_R, v_alpha, v_theta, alpha, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kartesische Komponenten aus (v_R, v_α, v_θ)"""
    sa, ca = np.sin(alpha), np.cos(alpha)
    st, ct = np.sin(theta), np.cos(theta)
    vx = v_R * sa * ct + v_alpha * ca * ct - v_theta * st
    vy = v_R * sa * st + v_alpha * ca * st + v_theta * ct
    vz = v_R * ca - v_alpha * sa
    return vx, vy, vz


def to_cylindrical(v_R, v_alpha, alpha) -> Tuple[np.ndarray, np.ndarray]:
    """(v_r, v_z) aus den meridionalen Komponenten"""
    return v_R * np.sin(alpha) + v_alpha * np.cos(alpha), v_R * np.cos(alpha) - v_alpha * np.sin(alpha)


def speed_grid(profile: Profile, r_range=(0.01, 1.0), z_range=(0.01, 1.0),
               n_r: int = 100, n_z: int = 100) -> FieldGrid:
    """Betrag der Geschwindigkeit"""
    r, z = _grid(r_range, z_range, n_r, n_z)
    v_R, v_alpha, v_theta = spherical_velocity(profile, r, z)
    return FieldGrid('speed', r, z, {'value': np.sqrt(v_R ** 2 + v_alpha ** 2 + v_theta ** 2)})


def velocity_grid(profile: Profile, r_range=(0.01, 1.0), z_range=(0.01, 1.0),
                  n_r: int = 100, n_z: int = 100, theta: float = 0.0) -> FieldGrid:
    """Kartesische Geschwindigkeit (vx, vy, vz) in der Ebene θ = theta"""
    r, z = _grid(r_range, z_range, n_r, n_z)
    v_R, v_alpha, v_theta = spherical_velocity(profile, r, z)
    vx, vy, vz = to_cartesian(v_R, v_alpha, v_theta, np.arctan2(r, z), theta)
    return FieldGrid('velocity', r, z, {'vx': vx, 'vy': vy, 'vz': vz})


def pressure_grid(profile: Profile, params: Optional[VortexParams] = None, T: float = 0.0,
                  r_range=(0.01, 1.0), z_range=(0.01, 1.0), n_r: int = 100,
                  n_z: int = 100) -> FieldGrid:
    """
    Druck über dem Gitter

    Für die b=1-Familie die geschlossene Form, sonst aus C1 und D1.
    """
    params = params or profile.params
    r, z = _grid(r_range, z_range, n_r, n_z)
    R = np.hypot(r, z)
    x = z / R
    if profile.metadata.get('generator') == 'analytic-b1':
        values = pressure_b1(R, x, profile.metadata['C1'], params.C_omega, T)
    else:
        values = pressure_from_profile(R, x, profile, params, T)
    return FieldGrid('pressure', r, z, {'value': np.asarray(values, dtype=float)})


def rayleigh_phi(profile: Profile, r, x, params: Optional[VortexParams] = None):
    """Φ = 2/r^(2(1+b)) Ω [(1-b) Ω - x (1-x^2) Ω']"""
    params = params or profile.params
    b = params.b
    r = np.asarray(r, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(r <= 0):
        raise SingularPointError("Rayleigh discriminant is singular on the axis")
    flat = x_arr.ravel()
    # nur Ω und Ω' werden gebraucht
    O = as_upper(profile).third.stack(flat)
    finite = O.is_finite(1)
    if not np.all(finite):
        bad = float(flat[np.argmin(finite)])
        raise SingularPointError(f"Omega is singular at x={bad}", x=bad)
    bracket = (O[0] * ((1.0 - b) * O[0] - flat * (1.0 - flat ** 2) * O[1])).reshape(x_arr.shape)
    phi = 2.0 / r ** (2.0 * (1.0 + b)) * bracket
    return float(phi) if np.ndim(phi) == 0 else phi


def classify_stability(profile: Profile, params: Optional[VortexParams] = None,
                       r_values: Sequence[float] = (0.1, 0.5, 1.0), mesh: Optional[Mesh] = None,
                       tol: float = 1e-8) -> StabilityReport:
    """Minimum von Φ über r_values x innere Knoten"""
    params = params or profile.params
    x = (mesh or profile.mesh or Mesh(200)).interior
    r, xx = np.meshgrid(np.asarray(r_values, dtype=float), x)
    phi = rayleigh_phi(profile, r, xx, params)
    report = StabilityReport(params.b, float(np.min(phi)), tol, int(phi.size))
    if not report.stable:
        logger.warning(f"Rayleigh criterion violated for b={params.b:g}: min Phi = {report.min_phi:.3e}")
    return report


def _cartesian_velocity(profile: Profile, point: np.ndarray) -> np.ndarray:
    r = math.hypot(point[0], point[1])
    alpha = math.atan2(r, point[2])
    theta = math.atan2(point[1], point[0])
    v_R, v_alpha, v_theta = spherical_velocity(profile, np.array([r]), np.array([point[2]]))
    return np.array([c.item() for c in to_cartesian(v_R, v_alpha, v_theta, alpha, theta)])


def _rk4(profile: Profile, point: np.ndarray, dt: float) -> np.ndarray:
    k0 = _cartesian_velocity(profile, point)
    k1 = _cartesian_velocity(profile, point + 0.5 * dt * k0)
    k2 = _cartesian_velocity(profile, point + 0.5 * dt * k1)
    k3 = _cartesian_velocity(profile, point + dt * k2)
    return point + dt / 6.0 * (k0 + 2.0 * k1 + 2.0 * k2 + k3)


def integrate_streamline(profile: Profile, start: Sequence[float], dt: float = 1e-3,
                         max_steps: int = 20000, eps: float = 1e-3,
                         r_max: float = 1e6) -> Streamline:
    """
    Klassisches Runge-Kutta-Verfahren vierter Ordnung für dX/dt = v(X)

    Der Schritt wird halbiert, solange |v| dt größer als ein Zehntel des
    Abstands zu Achse und Boden ist. Abbruch bei z <= eps, r <= eps,
    Verlassen des Gebiets oder nach max_steps Schritten.
    """
    point = np.asarray(start, dtype=float)
    if point.shape != (3,):
        raise ValidationError("start must be a Cartesian point (x, y, z)")
    if point[2] <= 0 or math.hypot(point[0], point[1]) <= 0:
        raise ValidationError("start must lie off the axis and above the ground")
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}")

    times, points = [0.0], [point.copy()]
    t = 0.0
    reason = 'max-steps'
    for _ in range(max_steps):
        r = math.hypot(point[0], point[1])
        cell = CELL_FRACTION * min(r, point[2])
        step = dt
        speed = float(np.linalg.norm(_cartesian_velocity(profile, point)))
        halvings = 0
        while speed * step > cell and halvings < MAX_STEP_HALVINGS:
            step *= 0.5
            halvings += 1
        try:
            candidate = _rk4(profile, point, step)
        except SingularPointError:
            reason = 'singular'
            break
        if not np.all(np.isfinite(candidate)):
            reason = 'non-finite'
            break
        point = candidate
        t += step
        times.append(t)
        points.append(point.copy())
        r = math.hypot(point[0], point[1])
        if point[2] <= eps or r <= eps:
            reason = 'boundary'
            break
        if math.hypot(r, point[2]) > r_max:
            reason = 'exit'
            break

    logger.debug(f"Streamline from {tuple(start)}: {len(points)} points, stop: {reason}")
    return Streamline(tuple(float(v) for v in start), dt, np.array(times), np.array(points), reason)


def powerlaw_exponent(profile: Profile, z0: float = 1.0,
                      r_samples: Sequence[float] = tuple(np.geomspace(0.01, 0.1, 20))) -> float:
    """
    Steigung von ln|v| über ln r in der Höhe z0

    Raises:
        ValidationError: weniger als zwei verschiedene Radien oder nicht-endliche Werte
    """
    r = np.asarray(r_samples, dtype=float)
    if np.any(r <= 0) or z0 <= 0:
        raise ValidationError("power-law samples need r > 0 and z0 > 0")
    if np.unique(r).size < 2:
        raise ValidationError("degenerate power-law fit: need at least two distinct radii")
    v_R, v_alpha, v_theta = spherical_velocity(profile, r, np.full_like(r, z0))
    speed = np.sqrt(v_R ** 2 + v_alpha ** 2 + v_theta ** 2)
    if not np.all(np.isfinite(speed)) or np.any(speed <= 0):
        raise ValidationError("degenerate power-law fit: speed not finite and positive")
    return float(stats.linregress(np.log(r), np.log(speed)).slope)
