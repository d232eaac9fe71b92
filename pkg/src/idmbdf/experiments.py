"""Self-convergence studies for the benchmark problems on ``(-1, 1) x (0, 1]``.

Each case fixes the initial data and the source; a plan sweeps the order
``gamma`` (paired with ``mu`` for singular sources), the smoothing level
``m`` and the number of steps ``N``.  Difference norms ``||u^N - u^{2N}||``
are taken at the terminal time.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

from .oracle import convergence_order
from .solver import (
    ConditionalStabilityWarning,
    ProblemSpec,
    advance,
    stability_check,
    stable_resolution,
)
from .sources import EXP, SourceDescriptor, doubled_exponential
from .spectral import cosine_sqrt_profile, laplacian_dirichlet, sine_sqrt_profile

#: difference norms below this are treated as roundoff and not used for rates
ROUNDOFF_FLOOR = 1e-12

DEFAULT_MS = (2, 3, 4, 5, 6, 7)
DEFAULT_NS = (200, 400, 800, 1600, 3200)

#: spatial degree, reduced automatically in the conditionally stable regime
DEFAULT_M = 32


CSV_HEADER = ("gamma", "mu", "m", "N", "diff_norm", "order", "roundoff_flag")


@dataclass(frozen=True)
class CaseDefinition:
    name: str
    pairs: tuple[tuple[float, float | None], ...]
    kind: str
    include_regular: bool = False
    wave: bool = True

    def source(self, mu: float | None) -> SourceDescriptor:
        if self.kind == "zero":
            return SourceDescriptor("zero")
        if self.kind == "power":
            return SourceDescriptor("power", mu=mu, spatial_profile=doubled_exponential)
        return SourceDescriptor(
            self.kind,
            mu=mu,
            temporal_factor=EXP,
            spatial_profile=doubled_exponential,
            include_regular=self.include_regular,
        )


CASES = {
    "a": CaseDefinition("a", ((1.3, None), (1.7, None)), "zero"),
    "b_conv": CaseDefinition("b_conv", ((1.3, -1.8), (1.7, -1.2)), "convolution", True),
    "b_prod": CaseDefinition("b_prod", ((1.3, -1.8), (1.7, -1.2)), "product", True),
    "c_power": CaseDefinition("c_power", ((0.3, -1.8), (0.7, -1.2)), "power", wave=False),
    "c_conv": CaseDefinition("c_conv", ((0.3, -1.8), (0.7, -1.2)), "convolution", True, False),
    "c_prod": CaseDefinition("c_prod", ((0.3, -1.8), (0.7, -1.2)), "product", True, False),
}


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentPlan:
    """One convergence table: the axes ``(gamma, mu) x m x N`` of a case."""

    case_id: str
    gammas: tuple[float, ...] = ()
    mus: tuple[float, ...] = ()
    k: int = 6
    ms: tuple[int, ...] = DEFAULT_MS
    Ns: tuple[int, ...] = DEFAULT_NS
    M: int | None = None
    T: float = 1.0
    out: str | None = None
    fmt: str = "csv"
    floor: float = ROUNDOFF_FLOOR

    def __post_init__(self) -> None:
        if self.case_id not in CASES:
            raise PlanError(f"unknown case {self.case_id!r}; expected one of {sorted(CASES)}")
        case = CASES[self.case_id]
        if not self.gammas:
            object.__setattr__(self, "gammas", tuple(g for g, _ in case.pairs))
            if case.kind != "zero" and not self.mus:
                object.__setattr__(self, "mus", tuple(mu for _, mu in case.pairs))

        for g in self.gammas:
            if g == 1:
                raise PlanError("gamma = 1 is excluded")
            if case.wave and not 1 < g < 2:
                raise PlanError(f"case {self.case_id} needs 1 < gamma < 2, got {g}")
            if not case.wave and not 0 < g < 1:
                raise PlanError(f"case {self.case_id} needs 0 < gamma < 1, got {g}")
        if case.kind == "zero":
            if self.mus:
                raise PlanError(f"case {self.case_id} has no singular source; drop --mu")
        else:
            if len(self.mus) != len(self.gammas):
                raise PlanError("gamma and mu lists are paired and must have equal length")
            for mu in self.mus:
                if not -2 < mu < -1:
                    raise PlanError(f"mu must lie in (-2, -1), got {mu}")
        if not 1 <= self.k <= 6:
            raise PlanError(f"k must be in 1..6, got {self.k}")
        if not self.ms or any(not 2 <= m <= 7 for m in self.ms):
            raise PlanError(f"m values must lie in 2..7, got {self.ms}")
        if len(self.Ns) < 2 or self.Ns[0] < 1:
            raise PlanError("need at least two positive N values")
        if any(b != 2 * a for a, b in zip(self.Ns, self.Ns[1:])):
            raise PlanError(f"N values must double: {self.Ns}")
        if self.M is not None and self.M < 2:
            raise PlanError(f"M must be at least 2, got {self.M}")
        if self.T <= 0:
            raise PlanError(f"T must be positive, got {self.T}")
        if self.fmt not in ("csv", "markdown"):
            raise PlanError(f"format must be csv or markdown, got {self.fmt!r}")

    @property
    def case(self) -> CaseDefinition:
        return CASES[self.case_id]

    @property
    def pairs(self) -> list[tuple[float, float | None]]:
        if self.case.kind == "zero":
            return [(g, None) for g in self.gammas]
        return list(zip(self.gammas, self.mus))

    def resolution(self, gamma: float) -> int:
        if self.M is not None:
            return self.M
        if stability_check(gamma, self.k) == "conditional":
            # keep the stiffest modes below the unstable band at the coarsest step
            return stable_resolution(gamma, self.k, self.T / min(self.Ns), DEFAULT_M)
        return DEFAULT_M


@dataclass
class ConvergenceRow:
    gamma: float
    mu: float | None
    m: int
    M: int
    Ns: tuple[int, ...] = ()
    diffs: list[float] = field(default_factory=list)
    unstable_runs: tuple[int, ...] = ()
    error: str | None = None
    floor: float = ROUNDOFF_FLOOR

    @property
    def stable(self) -> bool:
        return not self.unstable_runs

    @property
    def orders(self) -> list[float]:
        """Order between columns ``i-1`` and ``i``; NaN where undefined."""
        out = [math.nan]
        for a, b in zip(self.diffs, self.diffs[1:]):
            out.append(convergence_order([a, b])[0] if a > 0 and b > 0 else math.nan)
        return out[: len(self.diffs)]

    @property
    def flags(self) -> list[bool]:
        return [not d >= self.floor for d in self.diffs]

    @property
    def roundoff(self) -> bool:
        return any(self.flags)

    @property
    def final_rate(self) -> float:
        """Order between the last two columns, regardless of roundoff."""
        return self.orders[-1] if len(self.diffs) > 1 else math.nan

    @property
    def usable(self) -> list[bool]:
        """Columns clear of the floor whose two runs both stayed stable."""
        bad = set(self.unstable_runs)
        return [
            not flag and N not in bad and 2 * N not in bad
            for N, flag in zip(self.Ns, self.flags)
        ]

    @property
    def scored_pair(self) -> int | None:
        """Index of the finer column of the finest usable pair."""
        ok = self.usable
        for i in range(len(self.diffs) - 1, 0, -1):
            if ok[i] and ok[i - 1]:
                return i
        return None

    @property
    def rate(self) -> float:
        i = self.scored_pair
        return math.nan if i is None else self.orders[i]


@dataclass
class ConvergenceTable:
    case_id: str
    Ns: tuple[int, ...]
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.error is not None for r in self.rows)

    def row(self, gamma: float, m: int, mu: float | None = None) -> ConvergenceRow:
        for r in self.rows:
            if r.gamma == gamma and r.m == m and (mu is None or r.mu == mu):
                return r
        raise KeyError((gamma, mu, m))


def problem(case: CaseDefinition, gamma: float, mu, k: int, m: int, N: int, M: int, T: float):
    return ProblemSpec(
        gamma=gamma,
        k=k,
        m=m,
        T=T,
        N=N,
        initial=sine_sqrt_profile,
        velocity=cosine_sqrt_profile if gamma > 1 else None,
        source=case.source(mu),
        M=M,
    )


def run_row(plan: ExperimentPlan, gamma: float, mu, m: int) -> ConvergenceRow:
    M = plan.resolution(gamma)
    row = ConvergenceRow(gamma=gamma, mu=mu, m=m, M=M, Ns=tuple(plan.Ns), floor=plan.floor)
    A = laplacian_dirichlet(M)
    runs = list(plan.Ns) + [2 * plan.Ns[-1]]
    finals = {}
    unstable = []
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditionalStabilityWarning)
            # finest first so coarser grids reuse cached source samples
            for N in reversed(runs):
                spec = problem(plan.case, gamma, mu, plan.k, m, N, M, plan.T)
                traj = advance(spec, operator=A)
                finals[N] = traj.terminal
                if not traj.stable:
                    unstable.append(N)
    except Exception as exc:  # recorded per row, the sweep continues
        row.error = f"{type(exc).__name__}: {exc}"
        return row

    row.unstable_runs = tuple(sorted(unstable))
    row.diffs = [A.norm((finals[N] - finals[2 * N]).astype(float)) for N in plan.Ns]
    return row


def run_case(plan: ExperimentPlan, progress=None) -> ConvergenceTable:
    table = ConvergenceTable(case_id=plan.case_id, Ns=tuple(plan.Ns))
    for gamma, mu in plan.pairs:
        for m in plan.ms:
            row = run_row(plan, gamma, mu, m)
            table.rows.append(row)
            if progress is not None:
                progress(row)
    return table


def _fmt(x: float) -> str:
    return "" if x is None or math.isnan(x) else format(x, ".16e")


def to_csv(table: ConvergenceTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in table.rows:
        for N, d, o, flag in zip(table.Ns, r.diffs, r.orders, r.flags):
            mu = "" if r.mu is None else repr(r.mu)
            writer.writerow([repr(r.gamma), mu, r.m, N, _fmt(d), _fmt(o), int(flag)])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Parse :func:`to_csv` output back into typed records."""
    records = []
    for rec in csv.DictReader(io.StringIO(text)):
        records.append(
            {
                "gamma": float(rec["gamma"]),
                "mu": float(rec["mu"]) if rec["mu"] else None,
                "m": int(rec["m"]),
                "N": int(rec["N"]),
                "diff_norm": float(rec["diff_norm"]) if rec["diff_norm"] else math.nan,
                "order": float(rec["order"]) if rec["order"] else math.nan,
                "roundoff_flag": bool(int(rec["roundoff_flag"])),
            }
        )
    return records


def to_markdown(table: ConvergenceTable) -> str:
    singular = CASES[table.case_id].kind != "zero"
    head = ["(gamma, mu)" if singular else "gamma", "m"]
    head += [f"N={N}" for N in table.Ns] + ["Rate", "Final"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    notes = []
    for r in table.rows:
        label = f"({r.gamma}, {r.mu})" if singular else f"{r.gamma}"
        if r.error is not None:
            cells = ["failed"] * len(table.Ns) + ["", ""]
            notes.append(f"{label}, m={r.m}: {r.error}")
        else:
            cells = [f"{d:.4e}" + ("*" if f else "") for d, f in zip(r.diffs, r.flags)]
            cells.append("" if math.isnan(r.rate) else f"{r.rate:.4f}")
            cells.append("" if math.isnan(r.final_rate) else f"{r.final_rate:.4f}")
            if not r.stable:
                runs = ", ".join(map(str, r.unstable_runs))
                notes.append(f"{label}, m={r.m}: unstable at N = {runs}, not scored")
            if r.roundoff or not r.stable:
                i = r.scored_pair
                where = "no usable pair" if i is None else f"rate from N={table.Ns[i]}"
                notes.append(f"{label}, m={r.m}: norms below {r.floor:g} marked *, {where}")
        lines.append("| " + " | ".join([label, str(r.m)] + cells) + " |")
    if table.rows:
        lines.append("")
        lines.append("Rate uses the finest usable pair; Final is the last pair regardless.")
        lines.append(f"Spatial degree M = {sorted({r.M for r in table.rows})}.")
    for note in notes:
        lines.append(f"- {note}")
    return "\n".join(lines) + "\n"


def emit(table: ConvergenceTable, fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render *table* and write it to *path* when given; returns the text."""
    if fmt == "csv":
        text = to_csv(table)
    elif fmt in ("markdown", "md"):
        text = to_markdown(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def with_resolution(plan: ExperimentPlan, M: int) -> ExperimentPlan:
    return replace(plan, M=M)
