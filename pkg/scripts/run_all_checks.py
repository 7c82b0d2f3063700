#!/usr/bin/env python3
"""Run the full desk-scale diagnostic battery and write JSON reports.

Usage: python scripts/run_all_checks.py [--seed N] [--outdir reports]
"""

import argparse
import pathlib
import sys

import numpy as np

from fracou import diagnostics as dg
from fracou.simulate import TimeGrid


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--outdir", default="reports")
    ap.add_argument("--mc", type=int, default=2000)
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = TimeGrid(0.0, 2.0, 500)
    t_list = np.geomspace(10.0, 1000.0, 8)

    jobs = [
        ("l2sup", lambda: dg.check_l2_sup_convergence(
            1.9, 4.0, 1.0, [10, 100, 1000], grid, args.mc, args.seed)),
        ("tightness", lambda: dg.check_tightness(
            1.9, 4.0, 1.0, grid, [1000, 10000], args.mc, args.seed)),
        ("pathwise", lambda: dg.check_pathwise_conditions(
            1.9, 4.0, 1.0, [100, 1000, 10000], TimeGrid(0.0, 2.0, 100),
            args.seed)),
        ("cauchy_mu4", lambda: dg.check_cauchy_decay(
            1.9, 4.0, 1.0, t_list, args.mc, args.seed)),
        ("cauchy_mu04", lambda: dg.check_cauchy_decay(
            1.9, 0.4, 1.0, t_list, args.mc, args.seed)),
        ("cauchy_mu1", lambda: dg.check_cauchy_decay(
            1.0, 1.0, 1.0, t_list, args.mc, args.seed)),
        ("stationarity_19", lambda: dg.check_stationarity(
            1.9, 4.0, 1.0, TimeGrid(0.0, 2.0, 200), 5000, args.seed, 5e-3)),
        ("stationarity_1", lambda: dg.check_stationarity(
            1.0, 4.0, 1.0, TimeGrid(0.0, 2.0, 200), 5000, args.seed, 2e-3)),
        ("mixing_remark", lambda: dg.check_mixing_condition_remark(
            3.0, 1.0, 1.9)),
    ]

    worst = 0
    for name, job in jobs:
        rep = job()
        (outdir / f"{name}.json").write_text(rep.to_json())
        status = {"pass": 0, "inconclusive": 6, "fail": 5}[rep.verdict]
        worst = max(worst, status)
        print(f"{name:18s} {rep.verdict:12s} {rep.runtime_seconds:7.1f}s")
    return worst


if __name__ == "__main__":
    sys.exit(main())
