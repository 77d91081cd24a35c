#!/usr/bin/env python3
"""Run every named experiment at its default desk scale and write CSVs.

Usage: python scripts/run_desk_suite.py [outdir] [--seed S] [--fast]

--fast cuts replica counts by 100x for a quick sanity sweep.
"""

import argparse
import pathlib
import sys

from coarsening_lab.experiments import DEFAULTS, default_spec, run


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name in DEFAULTS:
        spec = default_spec(name)
        spec.master_seed = args.seed
        if args.fast:
            spec.replicas = max(50, spec.replicas // 100)
        spec.out = str(outdir / f"{name}.csv")
        try:
            res = run(spec)
        except ValueError as exc:
            print(f"{name}: precondition error ({exc})")
            failures += 1
            continue
        print(f"{name}: {len(res.rows)} rows -> {spec.out} ({res.wall_clock_s:.1f}s)")
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
