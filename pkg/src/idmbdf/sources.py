"""Hyper-singular sources ``t**mu o f`` and their m-fold integrals.

For ``-2 < mu < -1`` the function ``t**mu`` is not locally integrable and
its integrals are understood as Hadamard finite parts.  One integration by
parts moves the singularity to the weakly singular ``t**(mu + 1)`` and the
remaining algebraic factor is absorbed into a Gauss--Jacobi weight.  The
smoothed source ``G = J^m g`` then vanishes at ``t = 0`` and is sampled on
the time grid before stepping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath as mp
import numpy as np

from .errors import DomainError, QuadratureError, SmoothingError
from .quadrature import jacobi_integral
from .spectral import sample

#: decimal digits used when sampling smoothed sources for the time stepper
SOURCE_DPS = 60

KINDS = ("zero", "power", "convolution", "product", "regular")


def _exp(t):
    if isinstance(t, mp.mpf):
        return mp.exp(t)
    return np.exp(t)


@dataclass(frozen=True)
class TemporalFactor:
    """A smooth time factor ``f`` together with its derivative.

    Both callables must accept :class:`mpmath.mpf` scalars and numpy arrays.
    """

    name: str
    value: Callable
    derivative: Callable | None = None

    def __call__(self, t):
        return self.value(t)


EXP = TemporalFactor("exp", _exp, _exp)


def indicator_open_unit(x):
    """Indicator of the open interval ``(0, 1)``; zero at both end points."""
    x = np.asarray(x, dtype=float)
    return ((x > 0) & (x < 1)).astype(float)


def doubled_exponential(x):
    """The profile ``e^x (1 + chi_(0,1)(x))`` used by the benchmark sources."""
    return np.exp(x) * (1.0 + indicator_open_unit(x))


def unit_profile(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SourceDescriptor:
    """Description of a separable source ``g(x, t)``.

    ``kind`` selects the temporal structure:

    * ``zero``: ``g = 0``
    * ``power``: ``g = t**mu q(x)``
    * ``convolution``: ``g = (t**mu (*) f)(t) q(x)``, a finite-part convolution
    * ``product``: ``g = t**mu f(t) q(x)``
    * ``regular``: ``g = f(t) q(x)``

    With ``include_regular`` the summand ``1 o f`` is added to a singular
    kind: ``1 (*) f`` (an ordinary integral of ``f``) for convolutions and
    ``f`` itself for products.
    """

    kind: str
    mu: float | None = None
    temporal_factor: TemporalFactor | None = None
    spatial_profile: Callable = unit_profile
    include_regular: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {KINDS}")
        if self.is_singular:
            if self.mu is None or not -2 < self.mu < -1:
                raise DomainError(f"singular sources need -2 < mu < -1, got mu={self.mu}")
        if self.kind in ("convolution", "product", "regular"):
            if self.temporal_factor is None:
                raise ValueError(f"kind {self.kind!r} needs a temporal factor")
            if self.kind != "regular" and self.temporal_factor.derivative is None:
                raise ValueError(
                    "singular kinds need an analytic derivative of the temporal factor"
                )
        if self.include_regular and self.kind not in ("convolution", "product"):
            raise ValueError("include_regular only applies to convolution and product kinds")

    @property
    def is_singular(self) -> bool:
        return self.kind in ("power", "convolution", "product")


@dataclass(frozen=True, eq=False)
class SmoothedSource:
    """Samples ``G^n = (J^m g)(t_n)`` of a separable source.

    ``temporal`` holds the time factor on the grid (and ``temporal_mp`` the
    same values in multiprecision when available); the spatial vectors are
    ``samples[n] = temporal[n] * profile``.
    """

    m: int
    descriptor: SourceDescriptor
    temporal: np.ndarray
    profile: np.ndarray
    temporal_mp: tuple | None = field(default=None, repr=False)

    @property
    def samples(self) -> np.ndarray:
        return np.outer(self.temporal, self.profile)

    @property
    def N(self) -> int:
        return self.temporal.size - 1


def hadamard_power_integral(beta: float, t: float) -> float:
    """Finite part of ``int_0^t s**(-beta) ds`` for ``beta > 1``."""
    if beta <= 1:
        raise DomainError(f"finite part only needed for beta > 1, got {beta}")
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    return t ** (1 - beta) / (1 - beta)


def _gamma(x, dps):
    return mp.gamma(x) if dps is not None else math.gamma(x)


def _num(x, dps):
    return mp.mpf(x) if dps is not None else float(x)


def smooth_power_source(mu: float, m: int, t, dps: int | None = None):
    """``J^m t**mu = Gamma(mu + 1) t**(mu + m) / Gamma(mu + m + 1)``."""
    if mu + m <= 0:
        raise SmoothingError(f"mu + m must be positive, got mu={mu}, m={m}")
    if t == 0:
        return _num(0, dps)
    if dps is None:
        return math.gamma(mu + 1) * t ** (mu + m) / math.gamma(mu + m + 1)
    with mp.workdps(dps):
        mu = mp.mpf(mu)
        return mp.gamma(mu + 1) * mp.mpf(t) ** (mu + m) / mp.gamma(mu + m + 1)


def _check_mu(mu: float) -> None:
    if not -2 < mu < -1:
        raise DomainError(f"expected -2 < mu < -1, got {mu}")


def _checked(compute: Callable[[int], float], nodes: int, tol: float | None):
    """Evaluate with ``nodes`` and ``nodes + 4`` points and compare."""
    value = compute(nodes)
    if tol is not None:
        check = compute(nodes + 4)
        if abs(check - value) > tol * max(1.0, abs(value)):
            raise QuadratureError(
                f"quadrature did not converge: |difference| = {abs(check - value):.3e}"
            )
    return value


def finite_part_primitive(
    mu: float, f: Callable, df: Callable, t: float, *, nodes: int = 32, tol: float | None = 1e-12
) -> float:
    """Finite part of ``int_0^t s**mu f(s) ds`` by integration by parts."""
    _check_mu(mu)
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")

    def compute(n):
        weak = jacobi_integral(df, 0.0, t, left=mu + 1, nodes=n)
        return (t ** (mu + 1) * f(t) - weak) / (mu + 1)

    return _checked(compute, nodes, tol)


def finite_part_convolution(
    mu: float, f: Callable, df: Callable, t: float, *, nodes: int = 32, tol: float | None = 1e-12
) -> float:
    """Finite part of ``int_0^t (t - s)**mu f(s) ds`` by integration by parts."""
    _check_mu(mu)
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")

    def compute(n):
        weak = jacobi_integral(df, 0.0, t, right=mu + 1, nodes=n)
        return (t ** (mu + 1) * f(0.0) + weak) / (mu + 1)

    return _checked(compute, nodes, tol)


def _product_part(mu, f, df, m, t, nodes, panels, dps):
    # (1/(mu+1)) [J^{m-1}(s^{mu+1} f) - J^m(s^{mu+1} f')]
    a = jacobi_integral(f, 0, t, left=mu + 1, right=m - 2, nodes=nodes, panels=panels, dps=dps)
    b = jacobi_integral(df, 0, t, left=mu + 1, right=m - 1, nodes=nodes, panels=panels, dps=dps)
    mu_ = _num(mu, dps)
    return (a / _gamma(m - 1, dps) - b / _gamma(m, dps)) / (mu_ + 1)


def _convolution_part(mu, f, df, m, t, nodes, panels, dps):
    # Gamma(mu+1)/Gamma(mu+m+2) [f(0) t^{mu+m+1} + int_0^t (t-s)^{mu+m+1} f'(s) ds]
    mu_ = _num(mu, dps)
    p = mu_ + m + 1
    weak = jacobi_integral(df, 0, t, right=mu + m + 1, nodes=nodes, panels=panels, dps=dps)
    return _gamma(mu_ + 1, dps) / _gamma(p + 1, dps) * (f(_num(0, dps)) * t**p + weak)


def _plain_integral(f, order, t, nodes, panels, dps):
    # J^order f = (1/Gamma(order)) int_0^t (t-s)^{order-1} f(s) ds
    val = jacobi_integral(f, 0, t, right=order - 1, nodes=nodes, panels=panels, dps=dps)
    return val / _gamma(order, dps)


def smoothed_value(
    descriptor: SourceDescriptor,
    m: int,
    t,
    *,
    nodes: int = 32,
    panels: int = 1,
    dps: int | None = None,
):
    """Temporal factor of ``(J^m g)(t)`` for a separable source."""
    if m < 2:
        raise SmoothingError(f"at least two integrations are needed, got m={m}")
    kind = descriptor.kind
    if kind == "zero" or t == 0:
        return _num(0, dps)

    if dps is not None:
        with mp.workdps(dps):
            return _smoothed_value(descriptor, m, mp.mpf(t), nodes, panels, dps)
    return _smoothed_value(descriptor, m, float(t), nodes, panels, None)


def _smoothed_value(descriptor, m, t, nodes, panels, dps):
    kind = descriptor.kind
    mu = descriptor.mu
    f = descriptor.temporal_factor
    if kind == "power":
        return smooth_power_source(mu, m, t, dps)
    if kind == "regular":
        return _plain_integral(f, m, t, nodes, panels, dps)

    if kind == "product":
        value = _product_part(mu, f, f.derivative, m, t, nodes, panels, dps)
        if descriptor.include_regular:
            value += _plain_integral(f, m, t, nodes, panels, dps)
    else:
        value = _convolution_part(mu, f, f.derivative, m, t, nodes, panels, dps)
        if descriptor.include_regular:
            value += _plain_integral(f, m + 1, t, nodes, panels, dps)
    return value


@lru_cache(maxsize=None)
def _cached_value(descriptor, m, t: Fraction, nodes, panels, dps):
    with mp.workdps(dps):
        return smoothed_value(
            descriptor, m, mp.mpf(t.numerator) / t.denominator, nodes=nodes, panels=panels, dps=dps
        )


def smoothed_grid(
    descriptor: SourceDescriptor,
    m: int,
    tau: float,
    N: int,
    spatial_nodes=None,
    *,
    nodes: int = 32,
    panels: int = 1,
    dps: int | None = SOURCE_DPS,
) -> SmoothedSource:
    """Sample ``J^m g`` at ``t_n = n tau``, ``n = 0..N``.

    Values are computed in *dps*-digit arithmetic and memoised by exact
    time, so nested grids reuse each other's samples.  ``spatial_nodes``
    are the full collocation nodes; the profile is sampled at the interior
    ones.
    """
    if m < 2:
        raise SmoothingError(f"at least two integrations are needed, got m={m}")
    if descriptor.kind == "power" and descriptor.mu + m <= 0:
        raise SmoothingError(f"mu + m must be positive, got mu={descriptor.mu}, m={m}")

    if dps is None:
        values = [
            smoothed_value(descriptor, m, n * tau, nodes=nodes, panels=panels)
            for n in range(N + 1)
        ]
        values[0] = 0.0
        temporal_mp = None
    else:
        step = Fraction(tau).limit_denominator(10**12)
        values = [
            _cached_value(descriptor, m, n * step, nodes, panels, dps) for n in range(N + 1)
        ]
        values[0] = mp.mpf(0)
        temporal_mp = tuple(values)
    temporal = np.array([float(v) for v in values])
    if spatial_nodes is None:
        profile = np.ones(1)
    else:
        profile = sample(descriptor.spatial_profile, spatial_nodes)
    return SmoothedSource(
        m=m, descriptor=descriptor, temporal=temporal, profile=profile, temporal_mp=temporal_mp
    )
