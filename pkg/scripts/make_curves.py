"""Write the four new-vs-baseline curve families as CSV files.

Usage: python3 scripts/make_curves.py [OUTDIR] [--threads K]
"""

import argparse
from pathlib import Path

from sparse_jl.cli import main

CURVES = {
    "confidence": ["--n", "10000", "--m", "1000", "--s", "10", "--v", "0.05",
                   "--grid-log", "0.05", "2", "16"],
    "sparsity": ["--n", "10000", "--m", "1000", "--v", "0.3", "--target", "0.999999",
                 "--grid-log", "0.5", "2", "8"],
    "dimension": ["--n", "10000", "--ratio", "0.01", "--v", "0.05", "--grid-log", "0.2", "1", "6"],
    "union": ["--n", "10000", "--ratio", "0.01", "--v", "0.05", "--epsilon", "0.5",
              "--grid-log", "10", "10000", "4"],
}


def run(outdir: Path, threads: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for family, flags in CURVES.items():
        target = outdir / f"curve_{family}.csv"
        code = main(["curves", family, *flags, "--threads", str(threads), "-o", str(target)])
        print(f"{family:>10}: exit {code} -> {target}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir", nargs="?", default="results")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    run(Path(args.outdir), args.threads)
