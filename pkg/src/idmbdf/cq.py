"""BDF generating polynomials and convolution quadrature weights.

The weights of a fractional power of the BDF-k generating polynomial are
computed with the power-series power recursion in multiprecision and then
rounded once to double precision.  Rounding errors inside the recursion
would otherwise break the vanishing weight sum, and the factor
``tau**-order`` applied at evaluation time magnifies any such defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import DimensionError, InvalidOrderError

#: decimal digits used for the multiprecision weight recursion
WEIGHT_DPS = 40


@dataclass(frozen=True)
class BdfPolynomial:
    """Coefficients of ``sum_{j=1}^k (1 - xi)^j / j`` in powers of ``xi``."""

    k: int
    exact: tuple[Fraction, ...]

    @property
    def coeffs(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.exact)

    def __len__(self) -> int:
        return len(self.exact)


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Power-series coefficients of the BDF-k symbol raised to *order*.

    The weights are stored without the step size; the factor
    ``tau**-order`` is applied by :func:`discrete_conv_derivative`.
    """

    order: float
    k: int
    weights: np.ndarray

    @property
    def n_max(self) -> int:
        return self.weights.size - 1


def _check_k(k: int) -> None:
    if not 1 <= k <= 6:
        raise InvalidOrderError(f"BDF step number must be in 1..6, got {k}")


@lru_cache(maxsize=None)
def bdf_polynomial(k: int) -> BdfPolynomial:
    _check_k(k)
    coeffs = []
    for i in range(k + 1):
        c = sum(
            (Fraction((-1) ** i * math.comb(j, i), j) for j in range(max(i, 1), k + 1)),
            Fraction(0),
        )
        coeffs.append(c)

    return BdfPolynomial(k=k, exact=tuple(coeffs))


def _mpf(x: float | Fraction) -> mp.mpf:
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


@lru_cache(maxsize=64)
def _weights_mp(order: float, k: int, n_max: int, dps: int) -> tuple[mp.mpf, ...]:
    with mp.workdps(dps):
        c = [_mpf(x) for x in bdf_polynomial(k).exact]
        gamma = mp.mpf(order)
        w = [c[0] ** gamma]
        for n in range(1, n_max + 1):
            acc = mp.mpf(0)
            for j in range(1, min(n, k) + 1):
                acc += (gamma * j - (n - j)) * c[j] * w[n - j]
            w.append(acc / (n * c[0]))

        return tuple(w)


def cq_weights_mp(order: float, k: int, n_max: int, dps: int = WEIGHT_DPS) -> list[mp.mpf]:
    """Multiprecision weights (see :func:`cq_weights`)."""
    _check_k(k)
    if n_max < 0:
        raise InvalidOrderError(f"n_max must be non-negative, got {n_max}")

    return list(_weights_mp(float(order), k, n_max, dps))


def cq_weights(order: float, k: int, n_max: int) -> WeightSequence:
    """Convolution quadrature weights ``omega_0 .. omega_{n_max}``.

    Uses the recursion ``omega_n = sum_j (order*j - (n-j)) c_j omega_{n-j}
    / (n c_0)`` in :data:`WEIGHT_DPS`-digit arithmetic.
    """
    w = cq_weights_mp(order, k, n_max)
    return WeightSequence(
        order=float(order), k=k, weights=np.array([float(x) for x in w])
    )


@lru_cache(maxsize=None)
def integer_power_coefficients(m: int, k: int) -> tuple[Fraction, ...]:
    """Exact coefficients of the BDF-k symbol raised to a non-negative integer power.

    The result is a polynomial of degree ``m*k``; later weights vanish.
    """
    if m < 0:
        raise InvalidOrderError(f"integer power must be non-negative, got {m}")

    c = bdf_polynomial(k).exact
    out: list[Fraction] = [Fraction(1)]
    for _ in range(m):
        nxt = [Fraction(0)] * (len(out) + k)
        for i, a in enumerate(out):
            for j, b in enumerate(c):
                nxt[i + j] += a * b
        out = nxt

    return tuple(out)


def to_dtype(values, dtype=np.float64) -> np.ndarray:
    """Round multiprecision or rational *values* once into *dtype*.

    A second double carries the rounding remainder so that extended
    precision types receive more than 53 correct bits.
    """
    out = np.empty(len(values), dtype=dtype)
    extended = np.finfo(dtype).nmant > np.finfo(np.float64).nmant
    with mp.workdps(WEIGHT_DPS):
        for i, x in enumerate(values):
            hi = float(x)
            if not extended:
                out[i] = hi
                continue
            rest = x - Fraction(hi) if isinstance(x, Fraction) else x - mp.mpf(hi)
            out[i] = dtype(hi) + dtype(float(rest))
    return out


@lru_cache(maxsize=32)
def history_weights_mp(
    order: float, k: int, n_max: int, dps: int = WEIGHT_DPS
) -> tuple[int, tuple]:
    """Weights of the BDF-k symbol to *order* divided by ``(1 - xi)**q``.

    Here ``q = ceil(order)``, so the quotient stays bounded and the
    time stepper can march on ``q``-th backward differences instead of on
    the state itself.
    """
    q = math.ceil(order)
    with mp.workdps(dps):
        w = cq_weights_mp(order, k, n_max, dps)
        for _ in range(q):
            acc = mp.mpf(0)
            summed = []
            for x in w:
                acc += x
                summed.append(acc)
            w = summed
    return q, tuple(w)


@lru_cache(maxsize=32)
def history_weights(
    order: float, k: int, n_max: int, dps: int = WEIGHT_DPS, dtype=np.float64
) -> tuple[int, np.ndarray]:
    """:func:`history_weights_mp` rounded once into *dtype*."""
    q, w = history_weights_mp(order, k, n_max, dps)
    with mp.workdps(dps):
        out = to_dtype(w, dtype)
    out.setflags(write=False)
    return q, out


def discrete_conv_derivative(w: WeightSequence, values, tau: float) -> np.ndarray:
    """Evaluate ``tau**-order * sum_j omega_j values[n - j]`` at the last index."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    if n < 0:
        raise DimensionError("at least one value is required")
    if n > w.n_max:
        raise DimensionError(f"{n + 1} values but only {w.n_max + 1} weights")

    hist = np.tensordot(w.weights[: n + 1], values[::-1], axes=(0, 0))
    return tau ** (-w.order) * hist
