"""
Finite-Differenzen-Stencils auf gleichmäßigen Gittern
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from .stacks import ORDERS

# Zentrierte Stencil-Größen je Ableitungsordnung (alle 2. Ordnung genau)
CENTERED_SIZES = {0: 1, 1: 3, 2: 3, 3: 5, 4: 5}


class FiniteDifferences:
    """
    Klasse mit statischen Methoden für Differenzenquotienten
    """

    @staticmethod
    def weights(offsets: Tuple[int, ...], order: int) -> np.ndarray:
        """
        Gewichte für die Ableitung 'order' bei Einheitsschrittweite

        Args:
            offsets: Knotenversätze relativ zum Auswertungspunkt
            order: Ableitungsordnung

        Returns:
            Gewichte in der Reihenfolge der Versätze
        """
        offsets = np.asarray(offsets, dtype=float)
        size = offsets.size
        # Taylor-Bedingungen: sum_j w_j o_j^m / m! = delta_{m,order}
        powers = np.vander(offsets, size, increasing=True).T
        factorials = np.array([float(np.prod(np.arange(1, m + 1))) for m in range(size)])
        rhs = np.zeros(size)
        rhs[order] = 1.0
        return np.linalg.solve(powers / factorials[:, None], rhs)

    @staticmethod
    def window(index: int, n_nodes: int, order: int) -> Tuple[int, int]:
        """
        Stencil-Fenster (start, size) für Knoten 'index'

        Zentriert, wo es passt; sonst einseitig mit order+2 Punkten, in das
        Gitter [0, n_nodes) geschoben.
        """
        if order == 0:
            return index, 1
        size = CENTERED_SIZES[order]
        start = index - size // 2
        if start >= 0 and start + size <= n_nodes:
            return start, size
        size = order + 2
        start = min(max(index - size // 2, 0), n_nodes - size)
        return start, size

    @staticmethod
    def half_width(order: int) -> int:
        """Maximaler Abstand eines Stencil-Knotens vom Auswertungspunkt"""
        if order == 0:
            return 0
        return max(CENTERED_SIZES[order] // 2, order + 1)

    @staticmethod
    def derivative_rows(values: np.ndarray, h: float) -> np.ndarray:
        """Knotenwerte aller Ordnungen 0..4, Form (5, n)"""
        values = np.asarray(values, dtype=float)
        rows = np.empty((ORDERS, values.size))
        rows[0] = values
        for order in range(1, ORDERS):
            rows[order] = differentiation_matrix(values.size, float(h), order) @ values
        return rows


@lru_cache(maxsize=64)
def differentiation_matrix(n_nodes: int, h: float, order: int) -> sp.csr_matrix:
    """
    Dünnbesetzte Differentiationsmatrix der Ordnung 'order'

    Die Matrix ist gecacht und darf nicht verändert werden.
    """
    if n_nodes < order + 2:
        raise ValueError(f"need at least {order + 2} nodes for order {order}, got {n_nodes}")

    rows, cols, data = [], [], []
    cache = {}
    for i in range(n_nodes):
        start, size = FiniteDifferences.window(i, n_nodes, order)
        offsets = tuple(range(start - i, start - i + size))
        if offsets not in cache:
            cache[offsets] = FiniteDifferences.weights(offsets, order) / h ** order
        rows.extend([i] * size)
        cols.extend(range(start, start + size))
        data.extend(cache[offsets])

    return sp.csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))
