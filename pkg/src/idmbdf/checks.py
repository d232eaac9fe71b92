"""Seeded self-checks of the core invariants, runnable without the test suite."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cq import cq_weights, integer_power_coefficients
from .oracle import ScalarModeProblem, convergence_order, scalar_exact_solution, solve_scalar_mode
from .solver import ConditionalStabilityWarning, ProblemSpec, advance, scheme_residual
from .sources import (
    SourceDescriptor,
    TemporalFactor,
    doubled_exponential,
    smooth_power_source,
    smoothed_grid,
)
from .spectral import cgl_nodes, differentiation_matrix, laplacian_dirichlet


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _group(rng) -> CheckResult:
    worst = 0.0
    for _ in range(5):
        a, b = rng.uniform(-1.5, 1.5, size=2)
        k = int(rng.integers(1, 7))
        wa = cq_weights(a, k, 63).weights
        wb = cq_weights(b, k, 63).weights
        wab = cq_weights(a + b, k, 63).weights
        conv = np.convolve(wa, wb)[:64]
        worst = max(worst, float(np.max(np.abs(conv - wab))))
    return CheckResult("cq group property", bool(worst < 1e-12), f"max deviation {worst:.2e}")


def _integer(rng) -> CheckResult:
    worst = 0.0
    for m in range(1, 8):
        k = int(rng.integers(1, 7))
        exact = np.array([float(c) for c in integer_power_coefficients(m, k)])
        w = cq_weights(m, k, 80).weights
        ref = np.zeros(81)
        ref[: exact.size] = exact
        worst = max(worst, float(np.max(np.abs(w - ref))))
    return CheckResult("cq integer consistency", bool(worst < 1e-12), f"max deviation {worst:.2e}")


def _one(t):
    return t * 0 + 1


def _closed_form(rng) -> CheckResult:
    # the product route (finite part, then Gauss-Jacobi) against the closed form
    one = TemporalFactor("one", _one, lambda t: t * 0)
    worst = 0.0
    for _ in range(5):
        mu = float(rng.uniform(-1.95, -1.05))
        m = int(rng.integers(2, 8))
        t = float(rng.uniform(0.1, 1.0))
        desc = SourceDescriptor(
            "product", mu=mu, temporal_factor=one, spatial_profile=doubled_exponential
        )
        grid = smoothed_grid(desc, m, t / 4, 4, dps=None)
        exact = smooth_power_source(mu, m, t)
        worst = max(worst, abs(grid.temporal[-1] - exact) / abs(exact))
        worst = max(worst, abs(grid.temporal[0]))
    detail = f"max deviation {worst:.2e}"
    return CheckResult("finite-part source and G^0 = 0", bool(worst < 1e-12), detail)


def _spectral(rng) -> CheckResult:
    worst = 0.0
    for M in (8, 16, 24):
        x = cgl_nodes(M)
        c = rng.standard_normal(M + 1)
        p = np.polynomial.Polynomial(c)
        dp = differentiation_matrix(M) @ p(x)
        worst = max(worst, float(np.max(np.abs(dp - p.deriv()(x)))) / np.abs(c).sum())
    detail = f"max deviation {worst:.2e}"
    return CheckResult("spectral differentiation exactness", bool(worst < 1e-10), detail)


def _solver(rng) -> list[CheckResult]:
    A = laplacian_dirichlet(10)
    c = rng.standard_normal(3)

    def run(a, b, q):
        spec = ProblemSpec(
            gamma=1.4,
            k=4,
            m=3,
            T=1.0,
            N=64,
            initial=lambda x: a * np.sin(np.pi * x),
            velocity=lambda x: b * (1 - np.asarray(x) ** 2),
            source=SourceDescriptor("power", mu=-1.5, spatial_profile=lambda x: q * np.exp(x)),
            M=10,
        )
        return advance(spec, operator=A)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditionalStabilityWarning)
        parts = [run(c[0], 0, 0), run(0, c[1], 0), run(0, 0, c[2])]
        whole = run(*c)
        zero = advance(
            ProblemSpec(
                gamma=0.5,
                k=1,
                m=2,
                T=1.0,
                N=16,
                initial=lambda x: 0 * np.asarray(x),
                source=SourceDescriptor("zero"),
                M=6,
            )
        )
    total = sum(p.states_V for p in parts)
    lin = float(np.max(np.abs(total - whole.states_V)) / np.max(np.abs(whole.states_V)))
    res, scale = scheme_residual(whole, A.matrix)
    ratio = float(np.max(res[1:] / scale[1:]))
    return [
        CheckResult("solver linearity", bool(lin < 1e-12), f"relative deviation {lin:.2e}"),
        CheckResult("solver zero fixed point", not np.any(zero.states_V), "all levels zero"),
        CheckResult("scheme residual", bool(ratio < 1e-10), f"max residual/scale {ratio:.2e}"),
    ]


def _oracle() -> CheckResult:
    p = ScalarModeProblem(gamma=0.7, lam=-1.0, v0=1.0, b0=0.0, q0=1.0, mu=-1.2)
    exact = scalar_exact_solution(p, 1.0)
    errs = [abs(solve_scalar_mode(p, 2, 2, N).states_V[-1, 0] - exact) for N in (64, 128, 256)]
    order = convergence_order(errs)[-1]
    return CheckResult("scalar-mode oracle", bool(order > 1.8), f"observed order {order:.3f}")


def run_checks(seed: int = 0) -> list[CheckResult]:
    """Run every check with a generator seeded by *seed*."""
    rng = np.random.default_rng(seed)
    results = [_group(rng), _integer(rng), _closed_form(rng), _spectral(rng)]
    results += _solver(rng)
    results.append(_oracle())
    return results


def format_results(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
    return "\n".join(lines)

