#!/usr/bin/env python3
"""Q2 on a two-subdomain unit square: L2, broken H1 and |.|_{-1,hk} error rates."""
import argparse
import sys

from mortarfem.analysis import superconvergence_study
from mortarfem.cli import load_config, main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/superconvergence")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    cfg = load_config(None, "smooth-k2")
    recs = superconvergence_study(cfg.problem(), cfg.n_list, s=1, threads=args.threads)
    print(f"{'h':>8} {'L2':>11} {'H1':>11} {'neg-1':>11} {'p_L2':>7} {'p_H1':>7} {'p_neg':>7}")
    for r in recs:
        print(f"{r.h:8.5f} {r.error_l2:11.4e} {r.error_x:11.4e} {r.error_neg:11.4e} {r.p:7.3f} {r.p_x:7.3f} {r.p_neg:7.3f}")
    sys.exit(main(["negative-norm", "--preset", "smooth-k2", "--out", args.out, "--threads", str(args.threads)]))
