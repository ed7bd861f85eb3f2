#!/usr/bin/env python3
"""Finite-n crossing point p_half(n) of the success probability, per algorithm."""

import argparse
import json

from catperc.harness import estimate_p_half


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algorithms", default="oracle")
    ap.add_argument("--n", default="250,500,1000,2000")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--tol", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    for alg in a.algorithms.split(","):
        for n in (int(x) for x in a.n.split(",")):
            est = estimate_p_half(alg, n, a.trials, a.tol, master_seed=a.seed, threads=a.threads)
            print(json.dumps({"algorithm": alg, "n": n, "p_hat": est.p_hat,
                              "ci_low": est.ci_low, "ci_high": est.ci_high,
                              "probes": len(est.probes)}), flush=True)


if __name__ == "__main__":
    main()
