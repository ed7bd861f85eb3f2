#!/usr/bin/env python3
"""Success probability against p for several algorithms on shared seeds."""

import argparse
import sys

from catperc.harness import ExperimentConfig, emit, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algorithms", default="oracle,gta,bta")
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--p", default="0.30,0.35,0.40,0.45,0.50,0.55,0.60,0.65,0.70")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out")
    a = ap.parse_args()
    grid = [float(x) for x in a.p.split(",")]
    results = []
    for alg in a.algorithms.split(","):
        cfg = ExperimentConfig(alg, a.n, grid, a.trials, a.seed)
        results += run_trials(cfg, threads=a.threads)
        print(f"done {alg}", file=sys.stderr)
    text = emit(results, a.format, a.out)
    if a.out is None:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
