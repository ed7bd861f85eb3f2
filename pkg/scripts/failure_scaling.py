#!/usr/bin/env python3
"""Failure reasons of GTA/BTA as n grows, with the default or a scaled buffer.

The completion phase fails when the last run starting before the buffer is
still open at vertex n. With b = beta ln n this decays only like a small power
of n, which this scan makes visible.
"""

import argparse
import collections
import json

from catperc.beca import CompiledTable, bta
from catperc.clip import GtaParams, buffer_size, default_beta, gta
from catperc.edges import EdgeSampler
from catperc.harness import trial_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algorithm", choices=("gta", "bta"), default="gta")
    ap.add_argument("--p", type=float, default=0.6)
    ap.add_argument("--n", default="1000,10000,100000")
    ap.add_argument("--beta-scale", default="1.0")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    table = CompiledTable()
    for n in (int(x) for x in a.n.split(",")):
        for scale in (float(x) for x in a.beta_scale.split(",")):
            params = GtaParams(beta=scale * default_beta(a.p))
            reasons = collections.Counter()
            for i in range(a.trials):
                s = EdgeSampler(n, a.p, trial_seed(a.seed, i))
                r = gta(n, s, params) if a.algorithm == "gta" else bta(n, s, table, params)
                reasons[r.reason or "success"] += 1
            print(json.dumps({"algorithm": a.algorithm, "n": n, "p": a.p, "beta_scale": scale,
                              "buffer": buffer_size(n, a.p, params.beta),
                              "trials": a.trials, "outcomes": dict(reasons)}), flush=True)


if __name__ == "__main__":
    main()
