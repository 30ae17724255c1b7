#!/usr/bin/env python3
"""Run one or more experiment configs and write their reports.

    python3 scripts/run_experiment.py scripts/configs/c4_duality.json --out-dir reports
"""

import argparse
import sys
from pathlib import Path

from rmatch.experiments import experiment


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+", type=Path)
    ap.add_argument("--out-dir", type=Path, default=Path("reports"))
    ap.add_argument("--no-csv", action="store_true")
    args = ap.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for path in args.configs:
        rep = experiment(path)
        stem = args.out_dir / path.stem
        rep.write(stem.with_suffix(".json"), None if args.no_csv else stem.with_suffix(".csv"))
        verdict = "PASS" if rep.passed else "FAIL"
        failed += not rep.passed
        checks = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in rep.assertions.items())
        print(f"{verdict} {path.stem:<24} {rep.timings['total_seconds']:7.1f}s  {checks}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
