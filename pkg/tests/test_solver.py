import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idmbdf.cq import cq_weights
from idmbdf.errors import DimensionError, InvalidOrderError
from idmbdf.oracle import scalar_operator
from idmbdf.solver import (
    ConditionalStabilityWarning,
    ProblemSpec,
    advance,
    guard_levels,
    in_unstable_band,
    rhs_grid,
    scheme_residual,
    stability_check,
    stable_resolution,
    temporal_rhs,
    temporal_rhs_exact,
    unstable_band,
)
from idmbdf.sources import EXP, SourceDescriptor, doubled_exponential, smoothed_grid
from idmbdf.spectral import laplacian_dirichlet, sample

pytestmark = pytest.mark.filterwarnings("ignore::idmbdf.solver.ConditionalStabilityWarning")


def _zero(x):
    return 0 * np.asarray(x, dtype=float)


def _spec(gamma=1.4, k=4, m=3, N=40, M=10, a=1.0, b=1.0, q=1.0, kind="power", mu=-1.5):
    if kind == "power":
        source = SourceDescriptor("power", mu=mu, spatial_profile=lambda x: q * np.exp(x))
    elif kind == "zero":
        source = SourceDescriptor("zero")
    else:
        source = SourceDescriptor(
            kind, mu=mu, temporal_factor=EXP, include_regular=True,
            spatial_profile=lambda x: q * doubled_exponential(x),
        )
    return ProblemSpec(
        gamma=gamma,
        k=k,
        m=m,
        T=1.0,
        N=N,
        initial=lambda x: a * np.sin(np.pi * np.asarray(x)),
        velocity=(lambda x: b * (1 - np.asarray(x) ** 2)) if gamma > 1 else None,
        source=source,
        M=M,
    )


def test_problem_spec_validation():
    with pytest.raises(InvalidOrderError):
        _spec(gamma=1.0)
    with pytest.raises(InvalidOrderError):
        _spec(m=8)
    with pytest.raises(InvalidOrderError):
        _spec(k=7)
    with pytest.raises(ValueError):
        ProblemSpec(gamma=0.5, k=1, m=2, T=1, N=4, initial=_zero, source=SourceDescriptor("zero"),
                    velocity=_zero)
    with pytest.raises(ValueError):
        ProblemSpec(gamma=1.5, k=1, m=2, T=1, N=4, initial=_zero, source=SourceDescriptor("zero"))
    assert _spec(N=40).tau == 1 / 40


@pytest.mark.parametrize(
    "gamma, k, expected",
    [(1.7, 6, "conditional"), (0.7, 6, "unconditional"), (1.3, 3, "unconditional"),
     (1.11, 6, "conditional"), (1.95, 2, "unconditional"), (1.4, 5, "conditional")],
)
def test_stability_check(gamma, k, expected):
    assert stability_check(gamma, k) == expected


def test_rhs_grid_examples():
    A = laplacian_dirichlet(8)
    zero = ProblemSpec(gamma=1.5, k=2, m=2, T=1, N=4, initial=_zero, velocity=_zero,
                       source=SourceDescriptor("zero"), M=8)
    G = smoothed_grid(zero.source, 2, zero.tau, 4, A.nodes)
    assert not np.any(rhs_grid(zero, A, G))

    v = lambda x: np.sin(np.pi * np.asarray(x))  # noqa: E731
    sub = ProblemSpec(gamma=0.6, k=2, m=3, T=1, N=4, initial=v, source=SourceDescriptor("zero"), M=8)
    F = rhs_grid(sub, A, smoothed_grid(sub.source, 3, sub.tau, 4, A.nodes))
    np.testing.assert_allclose(F[1], 0.25**3 / 6 * A.matrix @ sample(v, A.nodes), rtol=1e-14, atol=1e-16)
    assert not np.any(F[0])

    wave = ProblemSpec(gamma=1.5, k=2, m=2, T=1, N=4, initial=_zero, velocity=v,
                       source=SourceDescriptor("zero"), M=8)
    F = rhs_grid(wave, A, smoothed_grid(wave.source, 2, wave.tau, 4, A.nodes))
    np.testing.assert_allclose(F[2], 0.5**3 / 6 * A.matrix @ sample(v, A.nodes), rtol=1e-14, atol=1e-16)


def test_rhs_grid_shape_mismatch():
    spec = _spec(N=8)
    A = laplacian_dirichlet(10)
    with pytest.raises(DimensionError):
        rhs_grid(spec, A, smoothed_grid(spec.source, spec.m, spec.tau, 7, A.nodes))
    with pytest.raises(DimensionError):
        rhs_grid(spec, A, smoothed_grid(spec.source, spec.m, spec.tau, 8, laplacian_dirichlet(6).nodes))


def test_zero_data_fixed_point():
    spec = ProblemSpec(gamma=0.5, k=1, m=2, T=1, N=16, initial=_zero, source=SourceDescriptor("zero"), M=6)
    traj = advance(spec)
    assert not np.any(traj.states_V)
    assert not np.any(traj.states_u)


def test_trajectory_layout():
    spec = _spec(N=20)
    traj = advance(spec)
    A = laplacian_dirichlet(spec.M)
    assert traj.states_V.shape == (21, spec.M - 1)
    assert not np.any(traj.states_V[0])
    np.testing.assert_array_equal(traj.states_u[0], sample(spec.initial, A.nodes))
    t = spec.times
    expected = traj.states_V[-1] + sample(spec.initial, A.nodes) + t[-1] * sample(spec.velocity, A.nodes)
    np.testing.assert_allclose(traj.final, expected, rtol=1e-14, atol=1e-15)
    assert traj.metadata["spec"] is spec
    assert traj.stable


@given(
    st.tuples(*[st.floats(-2, 2)] * 3),
    st.tuples(*[st.floats(-2, 2)] * 3),
    st.sampled_from([(1.4, 4), (0.6, 3), (1.8, 2)]),
)
def test_linearity(c1, c2, order):
    gamma, k = order

    def run(c):
        return advance(_spec(gamma=gamma, k=k, m=3, N=24, M=8, a=c[0], b=c[1], q=c[2])).states_V

    whole = run(tuple(x + y for x, y in zip(c1, c2)))
    parts = run(c1) + run(c2)
    scale = max(np.abs(run(c1)).max(), np.abs(run(c2)).max(), 1e-300)
    assert np.abs(whole - parts).max() <= 1e-12 * scale


@pytest.mark.parametrize(
    "kwargs",
    [dict(gamma=1.4, k=4, m=3), dict(gamma=0.7, k=6, m=7, kind="product", mu=-1.2),
     dict(gamma=1.3, k=6, m=5, kind="convolution", mu=-1.8), dict(gamma=0.3, k=2, m=2)],
)
def test_scheme_residual(kwargs):
    spec = _spec(N=60, M=12, **kwargs)
    traj = advance(spec)
    res, scale = scheme_residual(traj, laplacian_dirichlet(12).matrix)
    assert np.all(res[1:] < 1e-10 * scale[1:])


@pytest.mark.parametrize("kwargs", [dict(gamma=1.7, k=6, m=7), dict(gamma=0.7, k=6, m=6, mu=-1.2)])
def test_guarded_start_agrees_with_plain_march(kwargs):
    spec = _spec(N=80, M=8, **kwargs)
    guarded = advance(spec)
    plain = advance(spec, guard=False)
    scale = np.abs(guarded.states_V).max()
    assert np.abs(guarded.states_V - plain.states_V).max() < 1e-9 * scale


def test_guard_levels():
    assert guard_levels(7, 6, 10_000) == 2 * 8 * 6 + 32
    assert guard_levels(2, 1, 10) == 10


# delta^m = D^m (1 + O(tau^k D^k)), exact on degree m + 1 once k >= 2
@pytest.mark.parametrize("m, k", [(2, 2), (3, 4), (7, 6)])
def test_polynomial_rhs_is_exact_after_start_up(m, k):
    N = m * k + 8
    tau = Fraction(1, N)
    ra, rb, rs = temporal_rhs_exact(m, k, 1.0, N)
    assert ra[0] == rb[0] == 0 and not any(rs)
    # the m-th derivatives of t^m/m! and t^(m+1)/(m+1)! are 1 and t
    assert all(x == 1 for x in ra[m * k :])
    assert all(x == n * tau for n, x in enumerate(rb) if n >= m * k)
    fa, fb, _ = temporal_rhs(m, k, 1.0, N)
    np.testing.assert_array_equal(fa, [float(x) for x in ra])
    np.testing.assert_array_equal(fb, [float(x) for x in rb])


def _scalar_growth(s, gamma, k, n=1200):
    # direct recursion (w_0 + s) y_n = -sum_j w_j y_{n-j}, independent of the stepper
    w = cq_weights(gamma, k, n).weights
    y = np.zeros(n + 1)
    y[0] = 1.0
    for i in range(1, n + 1):
        y[i] = -(w[1 : i + 1] @ y[i - 1 :: -1]) / (w[0] + s)
    return np.abs(y[-200:]).max()


@pytest.mark.parametrize("gamma, k", [(1.7, 6), (1.3, 6), (1.5, 5), (1.7, 4)])
def test_unstable_band_matches_scalar_recursion(gamma, k):
    (lo, hi), = unstable_band(gamma, k)
    assert _scalar_growth(math.sqrt(lo * hi), gamma, k) > 1e3
    assert _scalar_growth(0.5 * lo, gamma, k) < 1
    assert _scalar_growth(2 * hi, gamma, k) < 1


@pytest.mark.parametrize("gamma, k", [(1.5, 4), (1.1, 6), (1.9, 3), (0.7, 6)])
def test_no_band_below_threshold(gamma, k):
    assert unstable_band(gamma, k) == ()


def test_band_reported_and_flagged():
    lo, hi = unstable_band(1.7, 6)[0]
    tau = 1 / 100
    lam = -math.sqrt(lo * hi) / tau**1.7
    assert in_unstable_band([lam], tau, 1.7, 6)
    assert not in_unstable_band([0.01 * lam], tau, 1.7, 6)
    spec = _spec(gamma=1.7, k=6, m=2, N=100, M=2)
    with pytest.warns(ConditionalStabilityWarning):
        traj = advance(spec, operator=scalar_operator(lam))
    assert traj.metadata["in_band"]
    assert not traj.stable


def test_stable_resolution():
    tau = 1 / 200
    M = stable_resolution(1.7, 6, tau, 32)
    lo = unstable_band(1.7, 6)[0][0]
    assert -laplacian_dirichlet(M).eigenvalues.real.min() * tau**1.7 < 0.25 * lo
    assert -laplacian_dirichlet(M + 1).eigenvalues.real.min() * tau**1.7 >= 0.25 * lo
    assert stable_resolution(0.7, 6, tau, 32) == 32


def test_conditional_runs_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConditionalStabilityWarning)
        with pytest.raises(ConditionalStabilityWarning):
            advance(_spec(gamma=1.7, k=6, m=2, N=10, M=4))
