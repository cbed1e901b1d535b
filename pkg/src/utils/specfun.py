"""
Spezielle Funktionen für die viskose Nichtexistenz-Analyse

Pochhammer-Symbol, log-Gamma (Lanczos, g=7, n=9) und die Gaußsche
hypergeometrische Funktion 2F1 auf [0, 1].
"""

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import SeriesConvergenceError, ValidationError

# Lanczos-Koeffizienten für g = 7, n = 9
LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 10 ** 6
SERIES_CHUNK = 65536


@dataclass(frozen=True)
class HyperParams:
    """Parameter (a, b; c) der Reihe 2F1"""
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.c <= 0 and float(self.c).is_integer():
            raise ValidationError(f"2F1 undefined for c={self.c} (nonpositive integer)")

    def shifted(self, n: int) -> 'HyperParams':
        """Parameter der n-ten Ableitung: (a+n, b+n; c+n)"""
        return HyperParams(self.a + n, self.b + n, self.c + n)

    @classmethod
    def for_swirl(cls, b_model: float) -> 'HyperParams':
        """Parameter ((1-b)/2, b/2; 3/2) des azimutalen Profils"""
        return cls((1.0 - b_model) / 2.0, b_model / 2.0, 1.5)


def pochhammer(x: float, n: int) -> float:
    """
    Steigende Fakultät (x)_n = x (x+1) ... (x+n-1)

    Überlauf liefert inf statt einer Exception.
    """
    if n < 0:
        raise ValidationError(f"Pochhammer order must be >= 0, got {n}")
    result = 1.0
    for k in range(n):
        result *= x + k
    return result


def ln_gamma(x: float) -> float:
    """Berechnet ln Γ(x) für x > 0"""
    if not x > 0:
        raise ValidationError(f"ln_gamma requires x > 0, got {x}")
    if x < 0.5:
        # Spiegelung: Γ(x) Γ(1-x) = π / sin(πx)
        return math.log(math.pi / math.sin(math.pi * x)) - ln_gamma(1.0 - x)

    x -= 1.0
    series = LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (x + i)
    t = x + LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(series)


def reciprocal_gamma(x: float) -> float:
    """1/Γ(x) für beliebige reelle x, exakt 0 an den Polstellen"""
    if x > 0:
        return math.exp(-ln_gamma(x))
    if float(x).is_integer():
        return 0.0
    # 1/Γ(x) = sin(πx) Γ(1-x) / π
    return math.sin(math.pi * x) * math.exp(ln_gamma(1.0 - x)) / math.pi


def gauss_2f1(params: HyperParams, z: float, max_terms: int = SERIES_MAX_TERMS) -> float:
    """
    Summiert die Reihe 2F1(a, b; c; z) für 0 <= z < 1

    Die Summation bricht ab, sobald |Term| < 1e-16 |Partialsumme|. Die Terme
    werden blockweise über kumulative Produkte der Termverhältnisse gebildet.

    Args:
        params: Parameter (a, b; c)
        z: Argument in [0, 1)
        max_terms: Obergrenze der Termanzahl

    Returns:
        Wert der Reihe
    """
    if not 0.0 <= z < 1.0:
        raise ValidationError(f"gauss_2f1 requires 0 <= z < 1, got {z}")
    if z == 0.0:
        return 1.0

    a, b, c = params.a, params.b, params.c
    total = 1.0
    last_term = 1.0
    start = 0

    while start < max_terms:
        n = np.arange(start, min(start + SERIES_CHUNK, max_terms), dtype=float)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        terms = last_term * np.cumprod(ratios)
        partial = total + np.cumsum(terms)

        small = np.nonzero(np.abs(terms) < SERIES_RTOL * np.abs(partial))[0]
        if small.size:
            stop = small[0]
            return float(partial[stop])

        total = float(partial[-1])
        last_term = float(terms[-1])
        if not math.isfinite(total):
            break
        start += n.size

    raise SeriesConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) did not converge within {max_terms} terms"
    )


def gauss_2f1_derivative(params: HyperParams, z: float, order: int,
                         max_terms: int = SERIES_MAX_TERMS) -> float:
    """n-te Ableitung nach z: (a)_n (b)_n / (c)_n · 2F1(a+n, b+n; c+n; z)"""
    if order == 0:
        return gauss_2f1(params, z, max_terms)
    factor = (pochhammer(params.a, order) * pochhammer(params.b, order)
              / pochhammer(params.c, order))
    if factor == 0.0:
        return 0.0
    return factor * gauss_2f1(params.shifted(order), z, max_terms)


def gauss_2f1_at_one(b_model: float) -> float:
    """
    Grenzwert 2F1((1-b)/2, b/2; 3/2; 1) = √π / (2 Γ((3-b)/2) Γ((2+b)/2))

    Exakt 0 für b = 3, 5, 7, ...
    """
    if not b_model > 0:
        raise ValidationError(f"b must be > 0, got {b_model}")
    return (0.5 * math.sqrt(math.pi)
            * reciprocal_gamma((3.0 - b_model) / 2.0)
            * reciprocal_gamma((2.0 + b_model) / 2.0))
