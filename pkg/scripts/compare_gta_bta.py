#!/usr/bin/env python3
"""GTA against BTA on paired seeds: success counts, failure reasons, sign test."""

import argparse
import collections
import json

from scipy.stats import binomtest

from catperc.beca import CompiledTable, bta
from catperc.clip import gta
from catperc.edges import EdgeSampler
from catperc.harness import trial_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--p", default="0.50,0.55,0.60")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    table = CompiledTable()
    for p in (float(x) for x in a.p.split(",")):
        reasons = {"gta": collections.Counter(), "bta": collections.Counter()}
        only_b = only_g = 0
        for i in range(a.trials):
            s = EdgeSampler(a.n, p, trial_seed(a.seed, i))
            g, b = gta(a.n, s), bta(a.n, s, table)
            reasons["gta"][g.reason or "success"] += 1
            reasons["bta"][b.reason or "success"] += 1
            only_b += b.success and not g.success
            only_g += g.success and not b.success
        disc = only_b + only_g
        pval = binomtest(only_b, disc, 0.5, alternative="greater").pvalue if disc else 1.0
        print(json.dumps({"n": a.n, "p": p, "trials": a.trials,
                          "gta": dict(reasons["gta"]), "bta": dict(reasons["bta"]),
                          "bta_only": only_b, "gta_only": only_g, "sign_test_p": pval}),
              flush=True)


if __name__ == "__main__":
    main()
