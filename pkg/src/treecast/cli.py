"""`simulate` command: run build/repair campaigns and emit a CSV.

Examples:
    simulate --alg build-mst --n 64,128 --m 4*n --u n^3 --trials 3 \
             --seed 1 --out results.csv
    simulate --alg repair-st --n 32 --events 40 --mode async --delay lifo

Exit status is 0 only if every trial succeeded and matched the oracle.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .experiments import (CSV_COLUMNS, ExperimentSpec, run_experiment,
                          write_csv)
from .generators import MODELS

ALGORITHMS = ("build-mst", "build-st", "repair-mst", "repair-st")


def _parse_n_list(text: str) -> List[int]:
    try:
        out = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise SystemExit(f"--n expects comma-separated integers, got {text!r}")
    if not out or any(v < 1 for v in out):
        raise SystemExit(f"--n values must be positive, got {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Distributed tree construction/repair experiments.")
    p.add_argument("--alg", required=True, choices=ALGORITHMS)
    p.add_argument("--n", required=True,
                   help="comma-separated node counts, e.g. 64,128,256")
    p.add_argument("--m", default="4*n",
                   help="edge count expression in n (default 4*n)")
    p.add_argument("--u", default="n**3",
                   help="max weight expression in n (default n**3)")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=int, default=2,
                   help="correctness exponent (failure target n^-c)")
    p.add_argument("--mode", choices=("sync", "async"), default="sync",
                   help="delivery model for repairs (builds are sync)")
    p.add_argument("--delay", default="uniform:4",
                   help="async delay policy: uniform:D or lifo")
    p.add_argument("--model", choices=MODELS, default="random-tree-plus")
    p.add_argument("--events", type=int, default=50,
                   help="events per repair trial")
    p.add_argument("--no-fast-forward", action="store_true",
                   help="simulate every idle construction phase explicitly")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--trace", action="store_true",
                   help="print one line per delivered message")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExperimentSpec(
        algorithm=args.alg,
        n_list=_parse_n_list(args.n),
        m_expr=args.m,
        u_expr=args.u,
        trials=args.trials,
        seed=args.seed,
        c=args.c,
        mode=args.mode,
        delay=args.delay,
        model=args.model,
        fast_forward=not args.no_fast_forward,
        events=args.events,
        trace=args.trace,
    )
    trace_sink: List[str] = []
    rows = run_experiment(spec, trace_sink)
    for line in trace_sink:
        print(line)
    print(",".join(CSV_COLUMNS))
    for row in rows:
        print(",".join(str(row[c]) for c in CSV_COLUMNS))
    if args.out:
        write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    ok = all(row["success"] and row["oracle_match"] for row in rows)
    return 0 if ok else 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
