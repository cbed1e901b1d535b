"""
Lesen und Schreiben von Lösungsdateien (JSON) und Tabellen (CSV)
"""

import json
import logging
import math
import os
import tempfile
from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd

from . import SCHEMA_VERSION
from .analytic import inviscid_b1, trivial_solution
from .exceptions import PersistenceError, ValidationError
from .model import Mesh, NODE_ATOL, Profile, VortexParams, sample_profile, sampled_profile
from .solvers.inviscid import profile_from_p

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ('version', 'generator', 'b', 'nu', 'C_omega', 'h', 'x', 'F', 'G', 'Omega')
OPTIONAL_KEYS = ('c', 'C1', 'residual_norm', 'iterations', 'closure', 'k', 'p')
# Toleranz, mit der eine geschlossene Form die gespeicherten Werte treffen muss
REBUILD_RTOL = 1e-9


def _to_json_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _to_json_value(v) for key, v in value.items()}
    if isinstance(value, np.ndarray):
        return [_to_json_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_to_json_value(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def _atomic_write(path: str, writer: Callable[[Any], None]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        handle = tempfile.NamedTemporaryFile('w', dir=directory, delete=False,
                                             suffix='.tmp', encoding='utf-8', newline='')
        try:
            with handle:
                writer(handle)
            os.replace(handle.name, path)
        except BaseException:
            if os.path.exists(handle.name):
                os.remove(handle.name)
            raise
    except OSError as error:
        raise PersistenceError(f"Cannot write {path}: {error}")
    logger.info(f"Wrote {path}")


def write_json(document: Dict[str, Any], path: str) -> None:
    """JSON atomar schreiben; NaN und inf werden zu null"""
    payload = _to_json_value(document)
    _atomic_write(path, lambda handle: json.dump(payload, handle, indent=1, allow_nan=False))


def write_csv(frame: pd.DataFrame, path: str) -> None:
    """CSV mit 17 signifikanten Stellen, atomar"""
    _atomic_write(path, lambda handle: frame.to_csv(handle, index=False, float_format='%.17g'))


def profile_document(profile: Profile, mesh: Optional[Mesh] = None) -> Dict[str, Any]:
    """Lösungsdokument im Dateischema"""
    mesh = mesh or profile.mesh or Mesh.from_step(1e-3)
    samples = sample_profile(profile, mesh)
    meta = profile.metadata
    params = profile.params
    document = {
        'version': SCHEMA_VERSION,
        'generator': meta.get('generator', 'unknown'),
        'b': params.b,
        'nu': params.nu,
        'c': meta.get('c'),
        'C1': meta.get('C1'),
        'C_omega': params.C_omega,
        'h': mesh.h,
        'x': samples['x'],
        'F': samples['F'],
        'G': samples['G'],
        'Omega': samples['Omega'],
        'residual_norm': meta.get('residual_norm', 0.0),
    }
    for key in ('iterations', 'closure', 'k', 'p'):
        if key in meta:
            document[key] = meta[key]
    return document


def save_profile(profile: Profile, path: str, mesh: Optional[Mesh] = None) -> None:
    write_json(profile_document(profile, mesh), path)


def _array(document: Dict[str, Any], key: str, size: int) -> np.ndarray:
    raw = document[key]
    if isinstance(raw, np.ndarray):
        raw = raw.tolist()
    if not isinstance(raw, list) or len(raw) != size:
        raise ValidationError(f"field '{key}' must be a list of {size} numbers")
    try:
        return np.array([np.nan if v is None else float(v) for v in raw])
    except (TypeError, ValueError):
        raise ValidationError(f"field '{key}' contains non-numeric entries")


def _matches(profile: Profile, mesh: Mesh, arrays: Dict[str, np.ndarray]) -> bool:
    samples = sample_profile(profile, mesh)
    for key in ('F', 'G', 'Omega'):
        expected, stored = samples[key], arrays[key]
        if not np.array_equal(np.isnan(expected), np.isnan(stored)):
            return False
        finite = ~np.isnan(stored)
        scale = 1.0 + np.max(np.abs(stored[finite]), initial=0.0)
        if np.max(np.abs(expected[finite] - stored[finite]), initial=0.0) > REBUILD_RTOL * scale:
            return False
    return True


def _metadata(document: Dict[str, Any]) -> Dict[str, Any]:
    meta = {'generator': document['generator']}
    for key in ('c', 'C1', 'residual_norm', 'iterations', 'closure', 'k'):
        if document.get(key) is not None:
            meta[key] = document[key]
    return meta


def profile_from_document(document: Dict[str, Any]) -> Profile:
    """
    Profil aus einem geladenen Dokument

    Geschlossene Formen und p-basierte Lösungen werden nur dann neu
    aufgebaut, wenn sie die gespeicherten Werte reproduzieren; sonst gelten
    die Gitterwerte.
    """
    missing = [key for key in REQUIRED_KEYS if key not in document]
    if missing:
        raise ValidationError(f"solution file lacks keys: {', '.join(missing)}")
    if document['version'] != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {document['version']}")

    try:
        mesh = Mesh.from_step(float(document['h']))
        params = VortexParams(float(document['b']), float(document['nu']), float(document['C_omega']))
    except (TypeError, ValueError) as error:
        raise ValidationError(f"invalid scalar field: {error}")

    size = mesh.n + 1
    arrays = {key: _array(document, key, size) for key in ('x', 'F', 'G', 'Omega')}
    if np.max(np.abs(arrays['x'] - mesh.nodes)) > NODE_ATOL * 10:
        raise ValidationError("x does not match the uniform mesh implied by h")

    meta = _metadata(document)
    generator = document['generator']
    candidate = None
    if generator == 'analytic-b1' and document.get('C1') is not None:
        candidate = inviscid_b1(float(document['C1']), params.C_omega)
    elif generator == 'trivial':
        candidate = trivial_solution(params)
    elif document.get('p') is not None and document.get('c') is not None:
        p = _array(document, 'p', size)
        candidate = profile_from_p(params.b, float(document['c']), mesh, p, meta)

    if candidate is not None:
        if _matches(candidate, mesh, arrays):
            return candidate.with_metadata(**meta)
        logger.warning(f"Stored values do not match generator '{generator}'; using sampled arrays")

    return sampled_profile(params, mesh, arrays['F'], arrays['G'], arrays['Omega'], meta)


def load_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            document = json.load(handle)
    except OSError as error:
        raise PersistenceError(f"Cannot read {path}: {error}")
    except json.JSONDecodeError as error:
        raise ValidationError(f"{path} is not valid JSON: {error}")
    if not isinstance(document, dict):
        raise ValidationError(f"{path} must contain a JSON object")
    return document


def load_profile(path: str) -> Profile:
    """Lösungsdatei lesen und validieren"""
    profile = profile_from_document(load_document(path))
    logger.info(f"Loaded {profile.metadata.get('generator')} solution from {path}")
    return profile
