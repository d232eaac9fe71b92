"""Time stepping for fractional evolution equations with smoothed sources.

With ``V = u - v - t b`` (the ``b`` term only for orders above one) and the
smoothed source ``G = J^m g`` the scheme reads

    tau^-gamma sum_j w_j^(gamma) V^{n-j} - A V^n = tau^-m sum_j w_j^(m) F^{n-j},
    F(t) = t^m/m! A v + t^(m+1)/(m+1)! A b + G(t).

Two numerical choices keep the double-precision noise floor near 1e-16:

* The discrete m-th derivative on the right is formed exactly from exact
  polynomial samples and fixed-point multiprecision source samples; done in
  floating point its rounding noise is amplified by roughly ``N**(m-gamma)``.
* The left-hand side is marched on ``q``-th backward differences of ``V``
  (``q = ceil(gamma)``) whose history weights are bounded, and ``V`` is
  recovered by compensated summation.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath as mp
import numpy as np

from .cq import (
    WEIGHT_DPS,
    bdf_polynomial,
    cq_weights,
    history_weights,
    history_weights_mp,
    integer_power_coefficients,
    to_dtype,
)
from .errors import DimensionError, InvalidOrderError, SolverError
from .sources import SmoothedSource, SourceDescriptor, smoothed_grid
from .spectral import SpatialOperator, laplacian_dirichlet, sample

#: fixed-point bits used when filtering source samples exactly
FILTER_BITS = 256

#: fixed-point bits of the guarded start-up levels
GUARD_BITS = 192

#: working precision of the stepper; ``np.float64`` is accepted as well
EXTENDED = np.longdouble

#: growth factor beyond the single-step response that marks a run unstable
GROWTH_LIMIT = 1e8

#: fraction of the lower edge of the unstable band used when choosing a resolution
STABILITY_MARGIN = 0.25

#: orders below which BDF-k convolution quadrature is unconditionally stable
GAMMA_STAR = {1: 2.0, 2: 2.0, 3: 1.91, 4: 1.68, 5: 1.40, 6: 1.11}


class ConditionalStabilityWarning(UserWarning):
    pass


def stability_check(gamma: float, k: int) -> str:
    """``"conditional"`` when ``gamma >= gamma*(k)``, else ``"unconditional"``."""
    if k not in GAMMA_STAR:
        raise InvalidOrderError(f"BDF step number must be in 1..6, got {k}")
    if not 0 < gamma < 2 or gamma == 1:
        raise InvalidOrderError(f"order must lie in (0, 1) or (1, 2), got {gamma}")
    return "conditional" if gamma >= GAMMA_STAR[k] else "unconditional"


@lru_cache(maxsize=None)
def unstable_band(gamma: float, k: int) -> tuple[tuple[float, float], ...]:
    """Intervals of ``s = -lam tau^gamma > 0`` where the scalar scheme is unstable.

    The boundary locus ``-delta(e^{i theta})^gamma`` meets the positive
    real axis where ``|arg delta(e^{i theta})| = pi / gamma``; consecutive
    crossings bound the unstable intervals.
    """
    stability_check(gamma, k)
    c = np.array([float(x) for x in bdf_polynomial(k).exact])
    theta = np.linspace(1e-6, np.pi, 200001)
    delta = np.polynomial.polynomial.polyval(np.exp(1j * theta), c)
    phase = np.abs(np.unwrap(np.angle(delta))) - np.pi / gamma

    crossings = []
    for i in np.nonzero(np.sign(phase[:-1]) != np.sign(phase[1:]))[0]:
        # linear interpolation on the fine grid is accurate to ~1e-10 relative
        t = phase[i] / (phase[i] - phase[i + 1])
        th = theta[i] + t * (theta[i + 1] - theta[i])
        crossings.append(float(abs(np.polynomial.polynomial.polyval(np.exp(1j * th), c)) ** gamma))
    crossings.sort()
    return tuple(zip(crossings[0::2], crossings[1::2]))


def in_unstable_band(eigenvalues, tau: float, gamma: float, k: int) -> bool:
    """True when some ``-lam tau^gamma`` falls inside :func:`unstable_band`."""
    if gamma < 1:
        return False
    s = -np.real(np.asarray(eigenvalues)) * tau**gamma
    return any(bool(np.any((s > lo) & (s < hi))) for lo, hi in unstable_band(gamma, k))


def stable_resolution(
    gamma: float, k: int, tau: float, M_max: int, margin: float = STABILITY_MARGIN
) -> int:
    """Largest ``M <= M_max`` keeping ``-lam tau^gamma`` below *margin* times the band's lower edge.

    Just below the band the parasitic roots sit close to the unit circle and
    decay slowly, hence the margin.
    """
    bands = unstable_band(gamma, k)
    if not bands:
        return M_max
    limit = margin * bands[0][0]
    for M in range(M_max, 1, -1):
        if -np.real(laplacian_dirichlet(M).eigenvalues).min() * tau**gamma < limit:
            return M
    raise SolverError(f"no spatial degree is stable for gamma={gamma}, k={k}, tau={tau}")


@dataclass(frozen=True)
class ProblemSpec:
    """Fractional evolution problem on ``(-1, 1) x (0, T]`` and its discretisation."""

    gamma: float
    k: int
    m: int
    T: float
    N: int
    initial: Callable
    source: SourceDescriptor
    velocity: Callable | None = None
    M: int = 32

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 2 or self.gamma == 1:
            raise InvalidOrderError(f"order must lie in (0, 1) or (1, 2), got {self.gamma}")
        if not 1 <= self.k <= 6:
            raise InvalidOrderError(f"BDF step number must be in 1..6, got {self.k}")
        if not 2 <= self.m <= 7:
            raise InvalidOrderError(f"smoothing level must be in 2..7, got {self.m}")
        if self.N < 1 or self.T <= 0:
            raise ValueError(f"need N >= 1 and T > 0, got N={self.N}, T={self.T}")
        if self.gamma < 1 and self.velocity is not None:
            raise ValueError("an initial velocity is only meaningful for orders above one")
        if self.gamma > 1 and self.velocity is None:
            raise ValueError("orders above one need an initial velocity")

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        return self.T * np.arange(self.N + 1) / self.N


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states_V: np.ndarray
    states_u: np.ndarray
    rhs: np.ndarray
    terminal: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.metadata.get("stable", True)

    @property
    def final(self) -> np.ndarray:
        return self.states_u[-1]


def rhs_grid(spec: ProblemSpec, A: SpatialOperator, G: SmoothedSource) -> np.ndarray:
    """Samples ``F^i`` of the smoothed right-hand side, one row per time level."""
    if G.N != spec.N or G.m != spec.m:
        raise DimensionError(
            f"source built for m={G.m}, N={G.N} but problem has m={spec.m}, N={spec.N}"
        )
    samples = G.samples
    if samples.shape[1] != A.matrix.shape[0]:
        raise DimensionError("source profile and operator have different sizes")

    t = spec.times
    m = spec.m
    F = np.outer(t**m / math.factorial(m), A.matrix @ sample(spec.initial, A.nodes))
    if spec.gamma > 1:
        v = A.matrix @ sample(spec.velocity, A.nodes)
        F += np.outer(t ** (m + 1) / math.factorial(m + 1), v)
    F += samples
    F[0] = 0.0
    return F


@lru_cache(maxsize=None)
def _integer_weights(m: int, k: int) -> tuple[tuple[int, ...], int]:
    w = integer_power_coefficients(m, k)
    denom = math.lcm(*(c.denominator for c in w))
    return tuple(int(c * denom) for c in w), denom


def _filter_exact(sequence: list[int], m: int, k: int) -> tuple[list[int], int]:
    """Exact ``sum_j w_j^(m) sequence[n - j]`` for integer samples.

    Returns integer sums and the common denominator of the weights.
    """
    W, denom = _integer_weights(m, k)
    last = len(W) - 1
    out = []
    for n in range(len(sequence)):
        out.append(sum(W[j] * sequence[n - j] for j in range(min(n, last) + 1)))
    return out, denom


@lru_cache(maxsize=64)
def _polynomial_exact(m: int, k: int, T: float, N: int) -> tuple[tuple, tuple]:
    # tau^-m sum w (n tau)^m / m! does not depend on tau
    a, denom = _filter_exact([n**m for n in range(N + 1)], m, k)
    b, _ = _filter_exact([n ** (m + 1) for n in range(N + 1)], m, k)
    tau = Fraction(T) / N
    ra = tuple(Fraction(x, denom * math.factorial(m)) for x in a)
    rb = tuple(Fraction(x, denom * math.factorial(m + 1)) * tau for x in b)
    return ra, rb


def _source_exact(m: int, k: int, T: float, N: int, source_values) -> list[Fraction]:
    with mp.workdps(int(FILTER_BITS / 3.3) + 10):
        fixed = [int(mp.nint(mp.ldexp(mp.mpf(v), FILTER_BITS))) for v in source_values]
    sums, denom = _filter_exact(fixed, m, k)
    scale = (Fraction(N) / Fraction(T)) ** m / (denom << FILTER_BITS)
    return [x * scale for x in sums]


def temporal_rhs_exact(m: int, k: int, T: float, N: int, source_values=None):
    """Rational values behind :func:`temporal_rhs`."""
    ra, rb = _polynomial_exact(m, k, float(T), N)
    if source_values is None:
        return list(ra), list(rb), [Fraction(0)] * (N + 1)
    return list(ra), list(rb), _source_exact(m, k, T, N, source_values)


def temporal_rhs(m: int, k: int, T: float, N: int, source_values=None, dtype=np.float64):
    """Discrete m-th derivatives of ``t^m/m!``, ``t^(m+1)/(m+1)!`` and the source factor.

    Polynomial samples are filtered in exact integer arithmetic.  Source
    samples are rounded once to a :data:`FILTER_BITS`-bit fixed-point grid
    and then filtered exactly.  Returns three arrays of length ``N + 1``.
    """
    return tuple(to_dtype(x, dtype) for x in temporal_rhs_exact(m, k, T, N, source_values))


def _refined_inverse(S: np.ndarray) -> np.ndarray:
    """Inverse of a well-conditioned matrix, polished in the dtype of *S*."""
    try:
        X = np.linalg.inv(S.astype(np.float64)).astype(S.dtype)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"shifted operator is singular: {exc}") from exc
    eye = np.eye(S.shape[0], dtype=S.dtype)
    for _ in range(2):
        X = X + X @ (eye - S @ X)
    if not np.all(np.isfinite(X)):
        raise SolverError("shifted operator could not be inverted")
    return X


def guard_levels(m: int, k: int, N: int) -> int:
    """Leading levels stepped in multiprecision.

    The discrete m-th derivative of non-polynomial data has a start-up
    transient over roughly ``m k`` levels that can exceed the data by many
    orders of magnitude; rounding it in working precision would leave an
    error that the undamped diffusion-wave dynamics carry to ``T``.
    """
    return min(N, 2 * (m + 1) * k + 32)


def _fixed(values, bits: int) -> np.ndarray:
    """Round mpf, Fraction or float values to integers scaled by ``2**bits``."""
    out = []
    for x in values:
        if isinstance(x, mp.mpf):
            out.append(int(mp.nint(mp.ldexp(x, bits))))
        else:
            x = Fraction(x) * (1 << bits)
            out.append(round(x))
    return np.array(out, dtype=object)


def _from_fixed(values, bits: int, dtype) -> np.ndarray:
    """Integers scaled by ``2**bits`` rounded into *dtype* through two doubles."""
    hi = [float(int(x)) for x in values]
    lo = [float(int(x) - int(h)) for x, h in zip(values, hi)]
    out = np.asarray(hi, dtype=np.float64).astype(dtype) + np.asarray(lo).astype(dtype)
    return np.ldexp(out, -bits)


def _march_head(matrix: np.ndarray, gamma: float, k: int, tau: float, head: np.ndarray):
    """``W^n``, ``V^n`` and ``nabla V^n`` for the guarded levels, in fixed point.

    *head* holds the right-hand sides of levels ``0..n0`` as integers scaled
    by ``2**GUARD_BITS``; the results use the same scaling.
    """
    n0, d = head.shape[0] - 1, head.shape[1]
    bits = GUARD_BITS
    q, B = history_weights_mp(gamma, k, n0, WEIGHT_DPS)
    with mp.workdps(WEIGHT_DPS):
        tg = mp.mpf(tau) ** (-mp.mpf(gamma))
        X = mp.inverse(B[0] * tg * mp.eye(d) - mp.matrix(matrix.tolist()))
        Xi = _fixed([X[i, j] for i in range(d) for j in range(d)], bits).reshape(d, d)
        Bi = _fixed(B, bits)
        tgi = int(mp.nint(mp.ldexp(tg, bits)))
    Ai = _fixed(matrix.ravel(), bits).reshape(d, d)

    W = np.zeros((n0 + 1, d), dtype=object)
    V = np.zeros((n0 + 1, d), dtype=object)
    D = np.zeros((n0 + 1, d), dtype=object)
    for n in range(1, n0 + 1):
        hist = Bi[n - 1 : 0 : -1].dot(W[1:n]) >> bits if n > 1 else np.zeros(d, dtype=object)
        P = V[n - 1] + D[n - 1] if q == 2 else V[n - 1]
        rhs = head[n] + (Ai.dot(P) >> bits) - ((tgi * hist) >> bits)
        W[n] = Xi.dot(rhs) >> bits
        D[n] = D[n - 1] + W[n]
        V[n] = V[n - 1] + (D[n] if q == 2 else W[n])
    return W, V, D


def _head_history(gamma: float, k: int, N: int, W: np.ndarray, dtype) -> np.ndarray:
    """``H^n = sum_{i <= n0} B_{n-i} W^i`` for ``n > n0``, summed exactly in fixed point."""
    n0, d = W.shape[0] - 1, W.shape[1]
    _, B = history_weights_mp(gamma, k, N, WEIGHT_DPS)
    with mp.workdps(WEIGHT_DPS):
        Bi = _fixed(B, GUARD_BITS)
    H = np.zeros((N + 1, d), dtype=dtype)
    if N > n0:
        n = np.arange(n0 + 1, N + 1)[:, None]
        lag = n - np.arange(1, n0 + 1)[None, :]
        sums = Bi[lag].dot(W[1:])
        H[n0 + 1 :] = _from_fixed(sums.ravel(), 2 * GUARD_BITS, dtype).reshape(-1, d)
    return H


def _split(x: np.ndarray, dtype) -> tuple[np.ndarray, np.ndarray]:
    """A fixed-point vector as an unevaluated sum of two *dtype* vectors."""
    scale = 1 << GUARD_BITS
    hi = _from_fixed(x, GUARD_BITS, dtype)
    rest = []
    for xi, h in zip(x, hi):
        # hi is recovered exactly as the sum of two doubles
        h1 = float(h)
        rest.append(Fraction(int(xi), scale) - Fraction(h1) - Fraction(float(h - dtype(h1))))
    return hi, to_dtype(rest, dtype)


def march(
    matrix: np.ndarray,
    gamma: float,
    k: int,
    tau: float,
    R: np.ndarray,
    dtype=EXTENDED,
    head: np.ndarray | None = None,
) -> tuple[np.ndarray, bool]:
    """Solve the stepping equations for ``V^1 .. V^N`` given right-hand sides ``R``.

    ``R[n]`` is the already discretely differentiated right-hand side at
    level ``n``.  All arithmetic is carried out in *dtype*, except for the
    levels covered by *head* (right-hand sides for ``n = 0..n0`` as
    integers scaled by ``2**GUARD_BITS``), which are stepped in fixed point
    and enter later history sums exactly.  Returns ``V`` (with ``V^0 = 0``) in
    *dtype* and a stability flag.
    """
    R = np.asarray(R, dtype=dtype)
    N = R.shape[0] - 1
    d = matrix.shape[0]
    A = np.asarray(matrix).astype(dtype)
    q, B = history_weights(gamma, k, N, dtype=dtype)
    with mp.workdps(WEIGHT_DPS):
        tg = to_dtype([mp.mpf(tau) ** (-mp.mpf(gamma))], dtype)[0]
    X = _refined_inverse(B[0] * tg * np.eye(d, dtype=dtype) - A)

    # increments stored level-major per component so history sums reduce
    # along a contiguous axis, where numpy sums pairwise
    W = np.zeros((d, N + 1), dtype=dtype)
    V = np.zeros((N + 1, d), dtype=dtype)
    # compensated running sums: V = v + cv and (q = 2) first difference d1 + c1
    v = np.zeros(d, dtype=dtype)
    cv = np.zeros(d, dtype=dtype)
    d1 = np.zeros(d, dtype=dtype)
    c1 = np.zeros(d, dtype=dtype)
    n0 = 0
    H = None
    if head is not None and len(head) > 1:
        n0 = min(len(head) - 1, N)
        Wh, Vh, Dh = _march_head(matrix, gamma, k, tau, head[: n0 + 1])
        W[:, 1 : n0 + 1] = _from_fixed(Wh[1:].ravel(), GUARD_BITS, dtype).reshape(n0, d).T
        V[1 : n0 + 1] = _from_fixed(Vh[1:].ravel(), GUARD_BITS, dtype).reshape(n0, d)
        v, cv = _split(Vh[n0], dtype)
        d1, c1 = _split(Dh[n0], dtype)
        H = _head_history(gamma, k, N, Wh, dtype)

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n0 + 1, N + 1):
            if H is None:
                hist = (W[:, :n] * B[n:0:-1]).sum(axis=1)
            else:
                hist = (W[:, n0 + 1 : n] * B[n - n0 - 1 : 0 : -1]).sum(axis=1) + H[n]
            rhs = R[n] - tg * hist + A @ v + A @ cv
            if q == 2:
                rhs += A @ d1 + A @ c1
            w = X @ rhs
            W[:, n] = w

            inc = w
            if q == 2:
                y = w + c1
                s = d1 + y
                c1 = y - (s - d1)
                d1 = s
                inc = d1 + c1
            y = inc + cv
            s = v + y
            cv = y - (s - v)
            v = s
            V[n] = v + cv

        response = np.abs(R @ X.T).max()
        scale = max(float(response), np.finfo(float).tiny)
        stable = bool(np.all(np.isfinite(V)) and float(np.abs(V).max()) <= GROWTH_LIMIT * scale)
    return V, stable


def _rhs_parts(spec: ProblemSpec, A: SpatialOperator, G: SmoothedSource):
    if G.N != spec.N or G.m != spec.m:
        raise DimensionError(
            f"source built for m={G.m}, N={G.N} but problem has m={spec.m}, N={spec.N}"
        )
    values = G.temporal_mp if G.temporal_mp is not None else G.temporal
    exact = temporal_rhs_exact(spec.m, spec.k, spec.T, spec.N, values)
    vectors = [A.matrix @ sample(spec.initial, A.nodes), None, G.profile]
    if spec.gamma > 1:
        vectors[1] = A.matrix @ sample(spec.velocity, A.nodes)
    return exact, vectors


def _assemble(exact, vectors, dtype) -> np.ndarray:
    R = None
    for r, vec in zip(exact, vectors):
        if vec is None:
            continue
        term = np.outer(to_dtype(r, dtype), np.asarray(vec).astype(dtype))
        R = term if R is None else R + term
    return R


def _assemble_head(exact, vectors, n0: int) -> np.ndarray:
    """Right-hand sides of levels ``0..n0`` as integers scaled by ``2**GUARD_BITS``."""
    d = len(vectors[0])
    head = np.zeros((n0 + 1, d), dtype=object)
    for r, vec in zip(exact, vectors):
        if vec is None:
            continue
        # float entries are dyadic, so these products are exact before rounding
        vi = _fixed(vec, GUARD_BITS)
        ri = _fixed(r[: n0 + 1], GUARD_BITS)
        head += np.outer(ri, vi) >> GUARD_BITS
    return head


def discrete_rhs(
    spec: ProblemSpec, A: SpatialOperator, G: SmoothedSource, dtype=EXTENDED
) -> np.ndarray:
    """``tau^-m sum_j w_j^(m) F^{n-j}`` for every level, evaluated separably."""
    exact, vectors = _rhs_parts(spec, A, G)
    return _assemble(exact, vectors, dtype)


def advance(
    spec: ProblemSpec,
    *,
    operator: SpatialOperator | None = None,
    source: SmoothedSource | None = None,
    quad_nodes: int = 32,
    dtype=EXTENDED,
    guard: bool = True,
) -> Trajectory:
    """Run the scheme for ``n = 1..N`` and return the full trajectory.

    Stored states are double precision; ``terminal`` keeps ``u^N`` in the
    working precision *dtype* for differencing nearby runs.
    """
    start = time.perf_counter()
    if stability_check(spec.gamma, spec.k) == "conditional":
        warnings.warn(
            f"BDF{spec.k} quadrature is only conditionally stable at order {spec.gamma}",
            ConditionalStabilityWarning,
            stacklevel=2,
        )
    A = operator if operator is not None else laplacian_dirichlet(spec.M)
    if source is None:
        source = smoothed_grid(spec.source, spec.m, spec.tau, spec.N, A.nodes, nodes=quad_nodes)

    exact, vectors = _rhs_parts(spec, A, source)
    R = _assemble(exact, vectors, dtype)
    head = _assemble_head(exact, vectors, guard_levels(spec.m, spec.k, spec.N)) if guard else None
    V, stable = march(A.matrix, spec.gamma, spec.k, spec.tau, R, dtype, head)

    in_band = in_unstable_band(A.eigenvalues, spec.tau, spec.gamma, spec.k)
    t = spec.times
    v0 = sample(spec.initial, A.nodes)
    u = V + v0.astype(dtype)
    if spec.gamma > 1:
        u += np.outer(t.astype(dtype), sample(spec.velocity, A.nodes).astype(dtype))
    u[0] = v0
    metadata = {
        "spec": spec,
        "M": A.M,
        "wall_time": time.perf_counter() - start,
        "stable": stable and not in_band,
        "in_band": in_band,
        "stability": stability_check(spec.gamma, spec.k),
    }
    return Trajectory(
        times=t,
        states_V=V.astype(np.float64),
        states_u=u.astype(np.float64),
        rhs=R.astype(np.float64),
        terminal=u[-1],
        metadata=metadata,
    )


def scheme_residual(traj: Trajectory, matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residual of the stepping equations in their original (non-incremental) form.

    Returns per-level maximum residuals and the matching magnitude scales
    ``tau^-gamma sum |w_j| |V^{n-j}| + |A V^n| + |R^n|``.
    """
    spec = traj.metadata["spec"]
    V = traj.states_V
    N = V.shape[0] - 1
    w = cq_weights(spec.gamma, spec.k, N).weights
    tg = spec.tau ** (-spec.gamma)
    absA = np.abs(matrix)
    res = np.zeros(N + 1)
    scale = np.zeros(N + 1)
    for n in range(1, N + 1):
        hist = w[: n + 1] @ V[n::-1]
        r = tg * hist - matrix @ V[n] - traj.rhs[n]
        s = tg * (np.abs(w[: n + 1]) @ np.abs(V[n::-1])) + absA @ np.abs(V[n]) + np.abs(traj.rhs[n])
        res[n] = np.abs(r).max()
        scale[n] = s.max()
    return res, scale
