"""Gauss--Jacobi rules for integrands with algebraic end-point singularities."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import mpmath as mp
import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError


def _jacobi_pair(n: int, a, b, y):
    """Return ``P_n(y)`` and ``P_{n-1}(y)`` for the Jacobi family ``(a, b)``."""
    p_prev = mp.mpf(1)
    p = ((a + b + 2) * y + (a - b)) / 2
    for j in range(1, n):
        s = 2 * j + a + b
        c1 = 2 * (j + 1) * (j + a + b + 1) * s
        c2 = (s + 1) * ((s + 2) * s * y + a * a - b * b)
        c3 = 2 * (j + a) * (j + b) * (s + 2)
        p_prev, p = p, (c2 * p - c3 * p_prev) / c1
    return p, p_prev


def _jacobi_derivative(n: int, a, b, y, p, p_prev):
    s = 2 * n + a + b
    return (n * ((a - b) - s * y) * p + 2 * (n + a) * (n + b) * p_prev) / (s * (1 - y * y))


@lru_cache(maxsize=128)
def _rule_mp(n: int, alpha: float, beta: float, dps: int) -> tuple[tuple, tuple]:
    y0, _ = roots_jacobi(n, alpha, beta)
    with mp.workdps(dps + 10):
        a, b = mp.mpf(alpha), mp.mpf(beta)
        ys = []
        for guess in y0:
            y = mp.mpf(guess)
            for _ in range(100):
                p, p_prev = _jacobi_pair(n, a, b, y)
                dy = p / _jacobi_derivative(n, a, b, y, p, p_prev)
                y -= dy
                if abs(dy) < mp.mpf(10) ** (-(dps + 5)):
                    break
            ys.append(y)

        const = (
            mp.gamma(n + a + 1) * mp.gamma(n + b + 1)
            / (mp.gamma(n + a + b + 1) * mp.factorial(n))
            * mp.mpf(2) ** (a + b + 1)
        )
        nodes, weights = [], []
        for y in ys:
            p, p_prev = _jacobi_pair(n, a, b, y)
            dp = _jacobi_derivative(n, a, b, y, p, p_prev)
            w = const / ((1 - y * y) * dp * dp)
            # map [-1, 1] to [0, 1]; weight (1-x)^alpha x^beta
            nodes.append((1 + y) / 2)
            weights.append(w / mp.mpf(2) ** (a + b + 1))

    with mp.workdps(dps):
        return tuple(+x for x in nodes), tuple(+w for w in weights)


@lru_cache(maxsize=128)
def _rule_float(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    y, w = roots_jacobi(n, alpha, beta)
    return (1 + y) / 2, w / 2.0 ** (alpha + beta + 1)


def gauss_jacobi(n: int, alpha: float, beta: float, dps: int | None = None):
    """Nodes and weights on ``[0, 1]`` for the weight ``(1 - x)**alpha * x**beta``.

    With ``dps=None`` the double-precision rule from :mod:`scipy` is
    returned as arrays; otherwise those nodes are refined by Newton's method
    on the three-term recurrence and tuples of :class:`mpmath.mpf` are
    returned.
    """
    if n < 1:
        raise ValueError(f"number of quadrature nodes must be positive, got {n}")
    if alpha <= -1 or beta <= -1:
        raise DomainError(f"Jacobi exponents must exceed -1, got {alpha}, {beta}")

    if dps is None:
        return _rule_float(n, float(alpha), float(beta))
    return _rule_mp(n, float(alpha), float(beta), dps)


def jacobi_integral(
    integrand: Callable,
    a,
    b,
    *,
    left: float = 0.0,
    right: float = 0.0,
    nodes: int = 32,
    panels: int = 1,
    dps: int | None = None,
):
    """Integrate ``(s - a)**left * (b - s)**right * integrand(s)`` over ``[a, b]``.

    The algebraic factors are absorbed into the Gauss--Jacobi weight on the
    first and last panel respectively and evaluated directly elsewhere.
    In double precision *integrand* receives an array of nodes; with *dps*
    set it is called once per node with :class:`mpmath.mpf` arguments.
    """
    if panels < 1:
        raise ValueError(f"number of panels must be positive, got {panels}")

    if dps is None:
        total = 0.0
        h = (b - a) / panels
        for i in range(panels):
            lo = a + i * h
            pl = left if i == 0 else 0.0
            pr = right if i == panels - 1 else 0.0
            x, w = gauss_jacobi(nodes, pr, pl)
            s = lo + h * x
            f = np.asarray(integrand(s), dtype=float)
            if pl != left:
                f = f * (s - a) ** left
            if pr != right:
                f = f * (b - s) ** right
            total += h ** (1 + pl + pr) * np.dot(w, f)
        return total

    with mp.workdps(dps):
        a, b = mp.mpf(a), mp.mpf(b)
        left_mp, right_mp = mp.mpf(left), mp.mpf(right)
        h = (b - a) / panels
        total = mp.mpf(0)
        for i in range(panels):
            lo = a + i * h
            pl = left if i == 0 else 0.0
            pr = right if i == panels - 1 else 0.0
            x, w = gauss_jacobi(nodes, pr, pl, dps)
            acc = mp.mpf(0)
            for xi, wi in zip(x, w):
                s = lo + h * xi
                f = integrand(s)
                if pl != left:
                    f *= (s - a) ** left_mp
                if pr != right:
                    f *= (b - s) ** right_mp
                acc += wi * f
            total += h ** (1 + mp.mpf(pl) + mp.mpf(pr)) * acc
        return total


def singular_quadrature(
    weight_exponent: float,
    integrand: Callable,
    a: float,
    b: float,
    nodes: int = 32,
    *,
    side: str = "left",
    dps: int | None = None,
):
    """Gauss--Jacobi quadrature of ``(s - a)**alpha f(s)`` or ``(b - s)**alpha f(s)``.

    Exact for polynomial *integrand* of degree up to ``2*nodes - 1``.
    """
    if side == "left":
        return jacobi_integral(integrand, a, b, left=weight_exponent, nodes=nodes, dps=dps)
    if side == "right":
        return jacobi_integral(integrand, a, b, right=weight_exponent, nodes=nodes, dps=dps)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
