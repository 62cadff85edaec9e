#!/usr/bin/env python3
"""Regenerate the headline result files into an output directory.

Runs the CLI subcommands with fixed seeds so the artifacts are reproducible
byte for byte:

  thresholds_m2.csv        optimized LP thresholds for m=2, n up to 14
  thresholds_m2_family.csv closed-form even-n thresholds up to n=50
  thresholds_m3.csv        optimized LP thresholds for m=3 (small n)
  persistency_table.csv    lower-bound table over N (rows) and m (columns)
  persistency_bounds.csv   per-N (lower, upper) pairs for m=2
  asymptotics.csv          family-only bounds out to N=1000

The full run is LP-heavy (tens of minutes); --quick trims the envelope to
a couple of minutes.
"""

import argparse
import sys
from pathlib import Path

from wpersist.cli import main as cli_main


def run(args: list[str]) -> None:
    print("wpersist " + " ".join(args), flush=True)
    code = cli_main(args)
    if code != 0:
        sys.exit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--quick", action="store_true", help="smaller envelope")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n_max = "8" if args.quick else "14"
    table_n = "8" if args.quick else "14"
    table_m = "2" if args.quick else "3"
    fig4_n = "20" if args.quick else "50"

    run(["pcrit", "--m", "2", "--n-min", "2", "--n-max", n_max,
         "--out", str(outdir / "thresholds_m2.csv")])
    run(["pcrit", "--m", "2", "--n-min", "4", "--n-max", "50", "--family-only",
         "--out", str(outdir / "thresholds_m2_family.csv")])
    if not args.quick:
        run(["pcrit", "--m", "3", "--n-min", "2", "--n-max", "6",
             "--out", str(outdir / "thresholds_m3.csv")])
    run(["persistency-table", "--N-max", table_n, "--m-max", table_m,
         "--out", str(outdir / "persistency_table.csv")])
    run(["fig4", "--N-max", fig4_n,
         "--out", str(outdir / "persistency_bounds.csv")])
    run(["fig4", "--N-max", "1000", "--family-only",
         "--out", str(outdir / "asymptotics.csv")])
    print(f"wrote results to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
