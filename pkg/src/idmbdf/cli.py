"""Command-line driver: convergence tables, the scalar-mode oracle and self-checks.

Exit codes: 0 on success, 1 on a usage error, 2 when a solver run fails
(or an oracle or self-check does not hold).
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError
from .experiments import CASES, ExperimentPlan, PlanError, emit, run_case

CASE_FLAGS = {name.replace("_", "-"): name for name in CASES}
SUFFIX = {"csv": ".csv", "markdown": ".md"}


@dataclass(frozen=True)
class Invocation:
    """Parsed command line: what to run and where to write it."""

    mode: str
    plans: tuple[ExperimentPlan, ...] = ()
    out: str | None = None
    fmt: str = "csv"

    @property
    def plan(self) -> ExperimentPlan:
        if len(self.plans) != 1:
            raise UsageError("this invocation covers several tables")
        return self.plans[0]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _list(cast, name):
    def parse(text: str):
        try:
            values = tuple(cast(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed {name} list {text!r}") from None
        if not values:
            raise argparse.ArgumentTypeError(f"empty {name} list")
        return values

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="idmbdf", description="Self-convergence tables for ID-m-BDF-k schemes.")
    p.add_argument("--case", choices=sorted(CASE_FLAGS), help="table to run (default: all six)")
    p.add_argument("--gamma", type=_list(float, "gamma"), default=())
    p.add_argument("--mu", type=_list(float, "mu"), default=())
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--m", type=_list(int, "m"), default=None)
    p.add_argument("--N", type=_list(int, "N"), default=None)
    p.add_argument("--M", type=int, default=None, help="spatial degree (default: automatic)")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--out", default=None, help="output file, or directory for the full sweep")
    p.add_argument("--format", choices=("csv", "md"), default="csv")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--oracle", action="store_true", help="run the scalar-mode validation")
    mode.add_argument("--seed-check", action="store_true", help="run the seeded self-checks")
    return p


def _glue_negative_lists(args: list[str]) -> list[str]:
    # "--mu -1.8,-1.2" would otherwise be read as an unknown option
    out = []
    it = iter(args)
    for a in it:
        if a in ("--mu", "--gamma"):
            nxt = next(it, None)
            if nxt is not None and re.match(r"-\.?\d", nxt):
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def parse_cli(args: list[str] | None = None) -> Invocation:
    args = sys.argv[1:] if args is None else list(args)
    ns = build_parser().parse_args(_glue_negative_lists(args))
    fmt = "markdown" if ns.format == "md" else "csv"
    if ns.oracle:
        return Invocation(mode="oracle", out=ns.out, fmt=fmt)
    if ns.seed_check:
        return Invocation(mode="seed-check", out=ns.out, fmt=fmt)

    if any(g == 1 for g in ns.gamma):
        raise UsageError("gamma = 1 is excluded: orders must lie in (0, 1) or (1, 2)")
    bad_mu = [mu for mu in ns.mu if not -2 < mu < -1]
    if bad_mu:
        raise UsageError(f"mu must lie in (-2, -1) for singular sources, got {bad_mu}")

    extra = {}
    if ns.m is not None:
        extra["ms"] = ns.m
    if ns.N is not None:
        extra["Ns"] = ns.N
    common = dict(k=ns.k, M=ns.M, T=ns.T, fmt=fmt, **extra)
    try:
        if ns.case is None:
            if ns.gamma or ns.mu:
                raise UsageError("--gamma and --mu need --case")
            plans = tuple(ExperimentPlan(case_id, **common) for case_id in CASES)
        else:
            plans = (
                ExperimentPlan(
                    CASE_FLAGS[ns.case], gammas=ns.gamma, mus=ns.mu, out=ns.out, **common
                ),
            )
    except PlanError as exc:
        raise UsageError(str(exc)) from None
    return Invocation(mode="tables", plans=plans, out=ns.out, fmt=fmt)


def _progress(row) -> None:
    status = "failed" if row.error else ("unstable runs" if not row.stable else "ok")
    print(f"  gamma={row.gamma} mu={row.mu} m={row.m} M={row.M}: {status}", file=sys.stderr)


def _run_tables(inv: Invocation) -> int:
    failed = False
    sweep = len(inv.plans) > 1
    if sweep and inv.out is not None:
        Path(inv.out).mkdir(parents=True, exist_ok=True)
    for plan in inv.plans:
        print(f"case {plan.case_id}", file=sys.stderr)
        start = time.perf_counter()
        table = run_case(plan, _progress)
        print(f"  done in {time.perf_counter() - start:.1f} s", file=sys.stderr)
        path = None
        if inv.out is not None:
            path = Path(inv.out) / f"{plan.case_id}{SUFFIX[inv.fmt]}" if sweep else Path(inv.out)
        text = emit(table, inv.fmt, path)
        if path is None:
            if sweep:
                print(f"# case {plan.case_id}")
            print(text, end="" if text.endswith("\n") else "\n")
        failed |= table.failed
    return 2 if failed else 0


def _run_oracle(inv: Invocation) -> int:
    from .oracle import (
        ScalarModeProblem,
        convergence_order,
        scalar_exact_solution,
        solve_scalar_mode,
    )

    ok = True
    lines = ["gamma,k,N,error,order"]
    for gamma in (0.7, 1.3):
        p = ScalarModeProblem(gamma=gamma, lam=-1.0, v0=1.0, b0=1.0, q0=1.0, mu=-1.2)
        exact = scalar_exact_solution(p, 1.0)
        for k in (1, 2):
            Ns = (64, 128, 256, 512, 1024)
            errs = [abs(solve_scalar_mode(p, k, 2, N).states_V[-1, 0] - exact) for N in Ns]
            orders = [float("nan")] + convergence_order(errs)
            for N, e, o in zip(Ns, errs, orders):
                lines.append(f"{gamma},{k},{N},{e:.6e},{o:.4f}")
            ok &= all(o >= k - 0.2 for o in orders[1:])
    text = "\n".join(lines) + "\n"
    if inv.out is not None:
        Path(inv.out).write_text(text)
    else:
        print(text, end="")
    return 0 if ok else 2


def _run_checks(inv: Invocation) -> int:
    from .checks import format_results, run_checks

    results = run_checks()
    text = format_results(results) + "\n"
    if inv.out is not None:
        Path(inv.out).write_text(text)
    else:
        print(text, end="")
    return 0 if all(r.ok for r in results) else 2


def main(argv: list[str] | None = None) -> int:
    try:
        inv = parse_cli(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    if inv.mode == "oracle":
        return _run_oracle(inv)
    if inv.mode == "seed-check":
        return _run_checks(inv)
    return _run_tables(inv)


if __name__ == "__main__":
    sys.exit(main())
