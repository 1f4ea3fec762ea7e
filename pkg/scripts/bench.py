"""Latency of random bound queries in both modes.

Usage: python3 scripts/bench.py [SAMPLES]
"""

import json
import sys
from contextlib import redirect_stdout
from io import StringIO

from sparse_jl.cli import main


def run(samples: int) -> None:
    for mode in ("corollary", "optimized"):
        buf = StringIO()
        with redirect_stdout(buf):
            main(["bench", "--samples", str(samples), "--mode", mode, "--format", "json"])
        s = json.loads(buf.getvalue())["summary"]
        print(f"{mode:>9}: median {s['median_ms']:.2f} ms  p90 {s['p90_ms']:.2f} ms  "
              f"p99 {s['p99_ms']:.2f} ms  clamp rate {s['clamp_rate']:.3f}")


if __name__ == "__main__":
    run(int(sys.argv[1]) if len(sys.argv) > 1 else 1000)
