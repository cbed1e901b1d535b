"""
Konfiguration für den Serrin Vortex Solver
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Dict, Any, Optional, Tuple

from .exceptions import PersistenceError, ValidationError

logger = logging.getLogger(__name__)

THREADS_ENV = "SERRIN_VORTEX_THREADS"


@dataclass
class NewtonConfig:
    """
    Parameter für das gedämpfte Newton-Verfahren
    """
    tol: float = 1e-10
    max_iter: int = 50
    max_halvings: int = 30
    eps: float = 1e-300           # Untergrenze für Potenzen von p
    negative_floor: float = -1e-12
    jacobian: str = 'exact'       # oder 'finite-differences'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tol': self.tol,
            'max_iter': self.max_iter,
            'max_halvings': self.max_halvings,
            'eps': self.eps,
            'negative_floor': self.negative_floor,
            'jacobian': self.jacobian
        }


@dataclass
class InviscidConfig:
    """
    Parameter für den reibungsfreien Fall 0 < b < 1
    """
    b: float = 0.6
    c: float = 0.25
    h: float = 1e-3
    # Sweeps
    b_list: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    c_list: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    # Grenzfall b -> 1
    limit_C1: float = 4.0 * 2.0 ** 0.5
    limit_C_omega: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'b': self.b,
            'c': self.c,
            'h': self.h,
            'sweep': {
                'b_list': list(self.b_list),
                'c_list': list(self.c_list)
            },
            'limit': {
                'C1': self.limit_C1,
                'C_omega': self.limit_C_omega
            }
        }


@dataclass
class ViscousConfig:
    """
    Parameter für Serrins viskoses System (b = 1)
    """
    nu: float = 1.0 / 200.0
    C_omega: float = 1.0
    h: Optional[float] = None       # None = min(1e-3, nu/4)
    closure: Optional[float] = None  # None = C_omega^2 / (2 nu)
    calibrate: bool = False
    calibration_window: Tuple[float, float] = (0.5, 0.95)
    # Grenzschicht
    delta: float = 0.05
    nu_list: Tuple[float, ...] = (1 / 100, 1 / 200, 1 / 500, 1 / 1000, 1 / 2000)
    # Fortsetzung in nu
    continuation_start: float = 0.05
    continuation_factor: float = 0.7

    def to_dict(self) -> Dict[str, Any]:
        return {
            'nu': self.nu,
            'C_omega': self.C_omega,
            'h': self.h,
            'closure': self.closure,
            'calibrate': self.calibrate,
            'calibration_window': list(self.calibration_window),
            'layer': {
                'delta': self.delta,
                'nu_list': list(self.nu_list)
            },
            'continuation': {
                'start': self.continuation_start,
                'factor': self.continuation_factor
            }
        }


@dataclass
class FieldConfig:
    """
    Parameter für Feldgitter, Stromlinien und Potenzgesetz
    """
    r_range: Tuple[float, float] = (0.01, 1.0)
    z_range: Tuple[float, float] = (0.01, 1.0)
    n_r: int = 100
    n_z: int = 100
    T: float = 0.0
    # Stromlinien
    dt: float = 1e-3
    max_steps: int = 20000
    # Potenzgesetz
    z0: float = 1.0
    r_window: Tuple[float, float] = (0.01, 0.1)
    n_samples: int = 20

    def to_dict(self) -> Dict[str, Any]:
        return {
            'grid': {
                'r_range': list(self.r_range),
                'z_range': list(self.z_range),
                'n_r': self.n_r,
                'n_z': self.n_z,
                'T': self.T
            },
            'streamline': {
                'dt': self.dt,
                'max_steps': self.max_steps
            },
            'powerlaw': {
                'z0': self.z0,
                'r_window': list(self.r_window),
                'n_samples': self.n_samples
            }
        }


@dataclass
class VerifyConfig:
    """
    Schwellwerte für die Residuenprüfung
    """
    closed_form_tol: float = 1e-9
    sampled_tol: float = 1e-3       # relativ zur Termgröße
    trim: float = 0.1               # Anteil, der an jedem Rand ignoriert wird
    flux_tol: float = 1e-5
    stability_tol: float = 1e-8

    def to_dict(self) -> Dict[str, Any]:
        return {
            'closed_form_tol': self.closed_form_tol,
            'sampled_tol': self.sampled_tol,
            'trim': self.trim,
            'flux_tol': self.flux_tol,
            'stability_tol': self.stability_tol
        }


@dataclass
class RunConfig:
    """
    Gesamtkonfiguration eines CLI-Laufs
    """
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    inviscid: InviscidConfig = field(default_factory=InviscidConfig)
    viscous: ViscousConfig = field(default_factory=ViscousConfig)
    fields: FieldConfig = field(default_factory=FieldConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    threads: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'newton': self.newton.to_dict(),
            'inviscid': self.inviscid.to_dict(),
            'viscous': self.viscous.to_dict(),
            'fields': self.fields.to_dict(),
            'verify': self.verify.to_dict(),
            'threads': self.threads
        }


def threads_from_env(default: int = 1) -> int:
    """Liest die maximale Thread-Anzahl aus SERRIN_VORTEX_THREADS"""
    raw = os.getenv(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise ValidationError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def _flatten(section: Dict[str, Any]) -> Dict[str, Any]:
    # verschachtelte Gruppen aus to_dict() wieder auf Feldnamen abbilden
    aliases = {
        ('sweep', 'b_list'): 'b_list',
        ('sweep', 'c_list'): 'c_list',
        ('limit', 'C1'): 'limit_C1',
        ('limit', 'C_omega'): 'limit_C_omega',
        ('layer', 'delta'): 'delta',
        ('layer', 'nu_list'): 'nu_list',
        ('continuation', 'start'): 'continuation_start',
        ('continuation', 'factor'): 'continuation_factor',
        ('grid', 'r_range'): 'r_range',
        ('grid', 'z_range'): 'z_range',
        ('grid', 'n_r'): 'n_r',
        ('grid', 'n_z'): 'n_z',
        ('grid', 'T'): 'T',
        ('streamline', 'dt'): 'dt',
        ('streamline', 'max_steps'): 'max_steps',
        ('powerlaw', 'z0'): 'z0',
        ('powerlaw', 'r_window'): 'r_window',
        ('powerlaw', 'n_samples'): 'n_samples',
    }
    flat = {}
    for key, value in section.items():
        if isinstance(value, dict):
            for inner, inner_value in value.items():
                name = aliases.get((key, inner))
                if name is None:
                    raise ValidationError(f"Unknown config key: {key}.{inner}")
                flat[name] = inner_value
        else:
            flat[key] = value
    return flat


def _apply(target: Any, overrides: Dict[str, Any], prefix: str) -> None:
    known = {f.name: f for f in fields(target)}
    for key, value in _flatten(overrides).items():
        if key not in known:
            raise ValidationError(f"Unknown config key: {prefix}{key}")
        current = getattr(target, key)
        if isinstance(current, tuple) and isinstance(value, list):
            value = tuple(value)
        setattr(target, key, value)


def load_config(path: Optional[str] = None) -> RunConfig:
    """
    Lädt die Konfiguration

    Args:
        path: Optionaler Pfad zu einer JSON-Datei im Layout von RunConfig.to_dict()

    Returns:
        RunConfig mit Defaults, Datei-Overrides und Thread-Limit aus der Umgebung
    """
    config = RunConfig()
    config.threads = threads_from_env(config.threads)

    if path is None:
        return config

    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as error:
        raise PersistenceError(f"Cannot read config {path}: {error}")
    except json.JSONDecodeError as error:
        raise ValidationError(f"Config {path} is not valid JSON: {error}")

    if not isinstance(data, dict):
        raise ValidationError(f"Config {path} must contain a JSON object")

    for key, value in data.items():
        if key == 'threads':
            config.threads = int(value)
            continue
        section = getattr(config, key, None)
        if section is None or not is_dataclass(section) or not isinstance(value, dict):
            raise ValidationError(f"Unknown config section: {key}")
        _apply(section, value, f"{key}.")

    logger.info(f"Loaded config overrides from {path}")
    return config
