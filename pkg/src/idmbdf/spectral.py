"""Chebyshev--Gauss--Lobatto collocation on ``(-1, 1)`` with Dirichlet data."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import InvalidOrderError


def cgl_nodes(M: int) -> np.ndarray:
    """Nodes ``x_j = cos(j pi / M)``, ``j = 0..M``, in descending order."""
    if M < 2:
        raise InvalidOrderError(f"resolution must be at least 2, got {M}")
    # sine form keeps the nodes exactly antisymmetric
    return np.sin(np.pi * (M - 2 * np.arange(M + 1)) / (2 * M))


@lru_cache(maxsize=None)
def _differentiation_matrix(M: int) -> np.ndarray:
    x = cgl_nodes(M)
    c = np.ones(M + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(M + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(M + 1))
    # negative-sum trick for the diagonal
    D -= np.diag(D.sum(axis=1))
    D.setflags(write=False)
    return D


def differentiation_matrix(M: int) -> np.ndarray:
    """First-derivative collocation matrix on the CGL nodes."""
    if M < 2:
        raise InvalidOrderError(f"resolution must be at least 2, got {M}")
    return _differentiation_matrix(M).copy()


@lru_cache(maxsize=None)
def clenshaw_curtis_weights(M: int) -> np.ndarray:
    """Clenshaw--Curtis quadrature weights on the CGL nodes."""
    if M < 2:
        raise InvalidOrderError(f"resolution must be at least 2, got {M}")
    theta = np.pi * np.arange(M + 1) / M
    w = np.zeros(M + 1)
    interior = np.arange(1, M)
    v = np.ones(M - 1)
    if M % 2 == 0:
        w[0] = w[M] = 1.0 / (M**2 - 1)
        for k in range(1, M // 2):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k**2 - 1)
        v -= np.cos(M * theta[interior]) / (M**2 - 1)
    else:
        w[0] = w[M] = 1.0 / M**2
        for k in range(1, (M - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k**2 - 1)
    w[interior] = 2.0 * v / M
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class SpatialOperator:
    """Dirichlet Laplacian on the interior CGL nodes."""

    M: int
    nodes: np.ndarray
    matrix: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def quadrature_weights(self) -> np.ndarray:
        return clenshaw_curtis_weights(self.M)[1:-1]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def norm(self, v) -> float:
        """Discrete L2 norm of interior nodal values (boundary values are zero)."""
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(np.dot(self.quadrature_weights, v * v)))


def laplacian_dirichlet(M: int) -> SpatialOperator:
    """Square of the differentiation matrix with boundary rows and columns removed."""
    D = differentiation_matrix(M)
    A = (D @ D)[1:-1, 1:-1]
    if M <= 64:
        if np.linalg.eigvals(A).real.max() >= 0:
            raise ArithmeticError(f"collocated Laplacian for M={M} is not dissipative")
    return SpatialOperator(M=M, nodes=cgl_nodes(M), matrix=A)


def sample(profile, nodes) -> np.ndarray:
    """Evaluate *profile* at the interior entries of the full node vector."""
    nodes = np.asarray(nodes, dtype=float)
    return np.asarray(profile(nodes[1:-1]), dtype=float) * np.ones(nodes.size - 2)


def sine_sqrt_profile(x):
    """``sin(x) sqrt(1 - x^2)``."""
    x = np.asarray(x, dtype=float)
    return np.sin(x) * np.sqrt(np.clip(1.0 - x * x, 0.0, None))


def cosine_sqrt_profile(x):
    """``cos(x) sqrt(1 - x^2)``."""
    x = np.asarray(x, dtype=float)
    return np.cos(x) * np.sqrt(np.clip(1.0 - x * x, 0.0, None))
