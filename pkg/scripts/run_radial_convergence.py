"""Shrinking-disk convergence study: diffuse interface vs the limit radius."""

import argparse
import os
import time

from pmefront.harness import ExperimentSpec, report_rows, run_convergence
from pmefront.output import emit_csv, ensure_dir
from pmefront.reaction import ReactionSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.08, 0.04, 0.02])
    ap.add_argument("--radius", type=float, default=1.0)
    ap.add_argument("--out", default="results/radial")
    args = ap.parse_args()

    out = ensure_dir(args.out)
    for m in args.m:
        exp = ExperimentSpec("radial_shrink", epsilons=tuple(args.epsilons),
                             spec=ReactionSpec.balanced(m, 1.0, 1.0), radius=args.radius)
        start = time.perf_counter()
        report = run_convergence(exp)
        print(f"m = {m:g}  ({time.perf_counter() - start:.1f} s)")
        print(report.summary())
        emit_csv(report, os.path.join(out, f"radial_m{m:g}.csv"))


if __name__ == "__main__":
    main()
