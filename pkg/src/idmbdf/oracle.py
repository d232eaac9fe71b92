"""Reference solutions for single eigenmodes and the self-convergence estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, OracleDomainError
from .solver import ProblemSpec, Trajectory, advance
from .sources import SourceDescriptor
from .spectral import SpatialOperator

#: series terms allowed before giving up
ML_MAX_TERMS = 200

#: working precision of the series; cancellation for |z| <= 8 stays far below it
ML_DPS = 50


def mittag_leffler(a: float, b: float, z: float) -> float:
    """Two-parameter Mittag-Leffler function ``sum_n z^n / Gamma(a n + b)``.

    Summed in multiprecision until a term falls below ``1e-16`` of the
    partial sum; only ``|z| <= 8`` is accepted.
    """
    if a <= 0:
        raise OracleDomainError(f"a must be positive, got {a}")
    if abs(z) > 8:
        raise OracleDomainError(f"series only trusted for |z| <= 8, got {z}")

    with mp.workdps(ML_DPS):
        a_, b_, z_ = mp.mpf(a), mp.mpf(b), mp.mpf(z)
        total = mp.mpf(0)
        power = mp.mpf(1)
        for n in range(ML_MAX_TERMS):
            term = power * mp.rgamma(a_ * n + b_)
            total += term
            if n > 0 and abs(term) < 1e-16 * abs(total):
                return float(total)
            if z_ == 0 and n > 0:
                return float(total)
            power *= z_
    raise OracleDomainError(f"series did not converge in {ML_MAX_TERMS} terms (a={a}, z={z})")


@dataclass(frozen=True)
class ScalarModeProblem:
    """The equation restricted to one eigenmode ``A -> lam``.

    ``V`` solves ``d^gamma V - lam V = lam v0 + lam b0 t + q0 t^mu`` with
    vanishing initial data; ``b0`` is ignored for ``gamma < 1``.
    """

    gamma: float
    lam: float
    v0: float
    b0: float
    q0: float
    mu: float
    T: float = 1.0

    def __post_init__(self) -> None:
        if self.lam >= 0 or abs(self.lam) > 4:
            raise DomainError(f"need -4 <= lam < 0, got {self.lam}")
        if abs(self.lam) * self.T**self.gamma > 8:
            raise DomainError("|lam| T^gamma must not exceed 8")
        if not -2 < self.mu < -1:
            raise DomainError(f"expected -2 < mu < -1, got {self.mu}")
        if not 0 < self.gamma < 2 or self.gamma == 1:
            raise DomainError(f"order must lie in (0, 1) or (1, 2), got {self.gamma}")


def scalar_exact_solution(p: ScalarModeProblem, t: float) -> float:
    """``V(t)`` from the Laplace pairs of ``t^(beta-1) E_{a,beta}(lam t^a)``.

    The transform of that function is ``z^(a-beta) / (z^a - lam)``.
    """
    if not 0 <= t <= p.T:
        raise DomainError(f"t must lie in [0, {p.T}], got {t}")
    g = p.gamma
    if t == 0:
        if p.q0 != 0 and g + p.mu <= 0:
            raise DomainError("solution is singular at t = 0")
        return 0.0

    z = p.lam * t**g
    value = p.lam * p.v0 * t**g * mittag_leffler(g, g + 1, z)
    if g > 1:
        value += p.lam * p.b0 * t ** (g + 1) * mittag_leffler(g, g + 2, z)
    if p.q0 != 0:
        value += (
            p.q0 * math.gamma(p.mu + 1) * t ** (g + p.mu) * mittag_leffler(g, g + p.mu + 1, z)
        )
    return value


def scalar_operator(lam: float) -> SpatialOperator:
    """A one-unknown operator: three nodes, one interior, matrix ``[[lam]]``."""
    return SpatialOperator(M=2, nodes=np.array([1.0, 0.0, -1.0]), matrix=np.array([[lam]]))


def _constant(c: float):
    return lambda x: c * np.ones_like(np.asarray(x, dtype=float))


def solve_scalar_mode(p: ScalarModeProblem, k: int, m: int, N: int) -> Trajectory:
    """Run the regular stepper on the 1x1 operator ``lam``."""
    source = SourceDescriptor("power", mu=p.mu, spatial_profile=_constant(p.q0))
    spec = ProblemSpec(
        gamma=p.gamma,
        k=k,
        m=m,
        T=p.T,
        N=N,
        initial=_constant(p.v0),
        velocity=_constant(p.b0) if p.gamma > 1 else None,
        source=source,
        M=2,
    )
    return advance(spec, operator=scalar_operator(p.lam))


def convergence_order(errs) -> list[float]:
    """``log2(errs[i] / errs[i + 1])`` for successive halvings of the step."""
    errs = [float(e) for e in errs]
    if len(errs) < 2:
        raise ValueError("need at least two error values")
    if any(not e > 0 for e in errs):
        raise DomainError("orders are only defined for positive errors")
    return [math.log(errs[i] / errs[i + 1]) / math.log(2) for i in range(len(errs) - 1)]
