#!/usr/bin/env python3
"""L-shaped domain, Q1 on three nonmatching subdomains, r = h^2.

Prints the error table with the reference column for comparison and writes
CSV/SVG/JSON into the output directory.
"""
import argparse
import sys

from mortarfem.cli import main

REFERENCE_L2 = {6: 0.026451, 8: 0.016035, 10: 0.010766, 12: 0.0077316, 14: 0.0058236}


def run(out: str, threads: int) -> int:
    from mortarfem.analysis import space_convergence
    from mortarfem.cli import load_config

    cfg = load_config(None, "table1")
    recs = space_convergence(cfg.problem(), cfg.n_list, cfg.time_step, cfg.T, threads=threads)
    print(f"{'h':>6} {'r':>8} {'L2 error':>12} {'reference':>10} {'p':>8} {'q':>8}")
    for n, rec in zip(cfg.n_list, recs):
        print(f"1/{n:<4} 1/{n * n:<6} {rec.error_l2:12.6g} {REFERENCE_L2[n]:10.6g} {rec.p:8.4f} {rec.q:8.4f}")
    return main(["convergence", "--preset", "table1", "--out", out, "--threads", str(threads)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/table1")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    sys.exit(run(args.out, args.threads))
