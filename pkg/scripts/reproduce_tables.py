"""Run the six benchmark convergence tables and write CSV and Markdown.

    python scripts/reproduce_tables.py --out results/ [--case a b_prod] [--M 32]

Each table takes a few minutes on one core; the full sweep about half an hour.
"""

import argparse
import sys
import time
from pathlib import Path

from idmbdf.experiments import CASES, ExperimentPlan, emit, run_case


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--case", nargs="*", choices=sorted(CASES), default=list(CASES))
    p.add_argument("--M", type=int, default=None, help="spatial degree (default: automatic)")
    args = p.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = False
    for case_id in args.case:
        start = time.perf_counter()
        table = run_case(ExperimentPlan(case_id, M=args.M))
        emit(table, "csv", out / f"{case_id}.csv")
        text = emit(table, "markdown", out / f"{case_id}.md")
        print(f"## case {case_id} ({time.perf_counter() - start:.0f} s)\n\n{text}")
        failed |= table.failed
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
