"""Tabulate the row-bound ratio new/baseline and print where it is smallest.

Usage: python3 scripts/ratio_grid.py [OUT.csv]
"""

import sys

import numpy as np

from sparse_jl.row_bound import ratio_grid


def run(path: str | None) -> None:
    rows = ratio_grid(10_000, np.geomspace(1e-3, 0.5, 25), np.geomspace(1e-2, 1.0, 25), range(2, 33, 2))
    ratios = np.array([r.ratio for r in rows])
    best, worst = rows[int(ratios.argmin())], rows[int(ratios.argmax())]
    print(f"cells={len(rows)}  max ratio={worst.ratio:.4f} at d={worst.d:g} p={worst.p:.3g} v={worst.v:.3g}")
    print(f"            min ratio={best.ratio:.4f} at d={best.d:g} p={best.p:.3g} v={best.v:.3g}")
    for d in (2, 8, 32):
        sub = ratios[[r.d == d for r in rows]]
        print(f"d={d:>2}: ratio in [{sub.min():.4f}, {sub.max():.4f}]")
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("d,p,v,t_new,t_old,ratio\n")
            for r in rows:
                handle.write(f"{r.d!r},{r.p!r},{r.v!r},{r.t_new!r},{r.t_old!r},{r.ratio!r}\n")


if __name__ == "__main__":
    run(sys.argv[1] if len(sys.argv) > 1 else None)
