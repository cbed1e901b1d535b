"""
Ableitungsstapel für geschlossene Formen

Ein Stapel hält die Werte y, y', y'', y''', y'''' an einer Menge von
Stützstellen. Produkte folgen der Leibniz-Regel, Potenzen der Formel von
Faà di Bruno. Nicht-endliche Einträge markieren Polstellen.
"""

from typing import Sequence, Union

import numpy as np

ORDERS = 5  # Ordnungen 0..4

# Bell-Polynome B_{n,j}(w1, w2, w3, w4) für n = 1..4
_BELL = {
    1: {1: lambda w: w[1]},
    2: {1: lambda w: w[2], 2: lambda w: w[1] ** 2},
    3: {1: lambda w: w[3], 2: lambda w: 3.0 * w[1] * w[2], 3: lambda w: w[1] ** 3},
    4: {
        1: lambda w: w[4],
        2: lambda w: 4.0 * w[1] * w[3] + 3.0 * w[2] ** 2,
        3: lambda w: 6.0 * w[1] ** 2 * w[2],
        4: lambda w: w[1] ** 4,
    },
}

# Binomialkoeffizienten für die Leibniz-Regel
_BINOMIAL = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1], [1, 4, 6, 4, 1]]


class DerivativeStack:
    """
    Werte und Ableitungen bis zur vierten Ordnung an festen Stützstellen

    'top' ist die höchste bekannte Ordnung; Zeilen darüber sind NaN und
    zählen bei is_finite nicht mit.
    """

    __slots__ = ('data', 'top')

    def __init__(self, data: np.ndarray, top: int = ORDERS - 1):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] != ORDERS:
            raise ValueError(f"stack must have shape ({ORDERS}, n), got {data.shape}")
        if not 0 <= top < ORDERS:
            raise ValueError(f"top order must lie in 0..{ORDERS - 1}, got {top}")
        self.data = data
        self.top = top

    # Konstruktoren
    @classmethod
    def constant(cls, x: np.ndarray, value: float) -> 'DerivativeStack':
        x = np.atleast_1d(np.asarray(x, dtype=float))
        data = np.zeros((ORDERS, x.size))
        data[0] = value
        return cls(data)

    @classmethod
    def identity(cls, x: np.ndarray) -> 'DerivativeStack':
        return cls.polynomial(x, (0.0, 1.0))

    @classmethod
    def polynomial(cls, x: np.ndarray, coefficients: Sequence[float]) -> 'DerivativeStack':
        """Polynom mit Koeffizienten in aufsteigender Ordnung"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        coefficients = np.asarray(coefficients, dtype=float)
        data = np.zeros((ORDERS, x.size))
        current = coefficients
        for k in range(ORDERS):
            if current.size:
                data[k] = np.polynomial.polynomial.polyval(x, current)
            current = np.polynomial.polynomial.polyder(current) if current.size > 1 else np.zeros(0)
        return cls(data)

    @classmethod
    def power_of_quadratic(cls, x: np.ndarray, a0: float, a1: float, a2: float,
                           k: float) -> 'DerivativeStack':
        """(a0 + a1 x + a2 x^2)^k mit exakten Ableitungen"""
        return cls.polynomial(x, (a0, a1, a2)).power(k)

    # Zugriff
    def __getitem__(self, order: int) -> np.ndarray:
        return self.data[order]

    def __len__(self) -> int:
        return self.data.shape[1]

    @property
    def value(self) -> np.ndarray:
        return self.data[0]

    def is_finite(self, order: int = ORDERS - 1) -> np.ndarray:
        """Maske der Stützstellen, an denen alle bekannten Ordnungen bis 'order' endlich sind"""
        return np.all(np.isfinite(self.data[:min(order, self.top) + 1]), axis=0)

    def take(self, index) -> 'DerivativeStack':
        return DerivativeStack(self.data[:, index], self.top)

    def derivative(self) -> 'DerivativeStack':
        """Stapel der Ableitung, eine Ordnung weniger bekannt"""
        if self.top == 0:
            raise ValueError("derivative of a stack without known derivatives")
        data = np.full_like(self.data, np.nan)
        data[:-1] = self.data[1:]
        return DerivativeStack(data, self.top - 1)

    # Arithmetik
    def __add__(self, other: Union['DerivativeStack', float]) -> 'DerivativeStack':
        if isinstance(other, DerivativeStack):
            return DerivativeStack(self.data + other.data, min(self.top, other.top))
        data = self.data.copy()
        data[0] = data[0] + other
        return DerivativeStack(data, self.top)

    __radd__ = __add__

    def __neg__(self) -> 'DerivativeStack':
        return DerivativeStack(-self.data, self.top)

    def __sub__(self, other: Union['DerivativeStack', float]) -> 'DerivativeStack':
        return self + (-other)

    def __rsub__(self, other: float) -> 'DerivativeStack':
        return (-self) + other

    def __mul__(self, other: Union['DerivativeStack', float]) -> 'DerivativeStack':
        if not isinstance(other, DerivativeStack):
            return DerivativeStack(self.data * other, self.top)
        a, b = self.data, other.data
        data = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        with np.errstate(invalid='ignore', over='ignore'):
            for n in range(ORDERS):
                for j in range(n + 1):
                    data[n] = data[n] + _BINOMIAL[n][j] * a[j] * b[n - j]
        return DerivativeStack(data, min(self.top, other.top))

    __rmul__ = __mul__

    def __truediv__(self, other: Union['DerivativeStack', float]) -> 'DerivativeStack':
        if isinstance(other, DerivativeStack):
            return self * other.power(-1.0)
        return DerivativeStack(self.data / other, self.top)

    def power(self, k: float) -> 'DerivativeStack':
        """
        Potenz w^k über Faà di Bruno

        Terme mit verschwindendem Vorfaktor werden übersprungen, damit an
        Nullstellen der Basis keine künstlichen 0·inf entstehen.
        """
        w = self.data
        data = np.zeros_like(w)
        falling = [1.0]
        for j in range(1, ORDERS):
            falling.append(falling[-1] * (k - j + 1))

        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            data[0] = np.power(w[0], k)
            for n in range(1, ORDERS):
                for j, bell in _BELL[n].items():
                    if falling[j] == 0.0:
                        continue
                    data[n] = data[n] + falling[j] * np.power(w[0], k - j) * bell(w)
        return DerivativeStack(data, self.top)

    def sqrt(self) -> 'DerivativeStack':
        return self.power(0.5)

    def __repr__(self) -> str:
        return f"DerivativeStack(n={len(self)}, top={self.top})"


def one_minus_x2(x: np.ndarray, k: float = 1.0) -> DerivativeStack:
    """(1 - x^2)^k"""
    return DerivativeStack.power_of_quadratic(x, 1.0, 0.0, -1.0, k)
