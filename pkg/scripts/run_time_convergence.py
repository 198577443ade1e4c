#!/usr/bin/env python3
"""Backward Euler temporal order at fixed h = 1/16 with Q2 elements."""
import argparse
import sys

from mortarfem.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/time_convergence")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    code = main(["time-convergence", "--preset", "smooth-k2", "--out", args.out, "--threads", str(args.threads)])
    if code == 0:
        with open(f"{args.out}/time_convergence.csv") as fh:
            print(fh.read())
    sys.exit(code)
