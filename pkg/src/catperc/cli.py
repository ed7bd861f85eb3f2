"""Command-line entry point.

Exit status: 0 when the command ran, 1 for usage or input errors, 2 when an
experiment could not produce a result (I/O failure, unresolvable threshold
search, a move table that fails validation).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import beca, clip, harness, oracle, ruin
from .edges import EdgeSampler, read_edge_file


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _print(obj) -> None:
    print(json.dumps(obj, indent=2))


def _gta_params(a) -> clip.GtaParams:
    return clip.GtaParams(a.beta, a.root_limit, a.max_list_length)


def _add_gta_flags(sp) -> None:
    sp.add_argument("--beta", type=float)
    sp.add_argument("--root-limit", type=float, default=0.5)
    sp.add_argument("--max-list-length", type=int)
    sp.add_argument("--triangles", action="store_true", help="include the triangle list")


def _add_single_run(sp) -> None:
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)


def cmd_exact(a) -> int:
    if a.edges:
        avail = read_edge_file(a.edges)
        n, adj = avail.n, None
    else:
        if a.n is None or a.p is None:
            raise UsageError("exact needs --edges FILE or both --n and --p")
        if a.n > harness.ORACLE_N_CAP and not a.allow_large_oracle:
            raise UsageError(f"n > {harness.ORACLE_N_CAP}: pass --allow-large-oracle")
        avail = EdgeSampler(a.n, a.p, a.seed)
        n, adj = a.n, avail.adjacency()
    ok = oracle.can_triangulate(n, avail, rule=a.rule, adjacency=adj)
    out = {"n": n, "rule": a.rule, "triangulable": ok}
    if a.witness and ok and a.rule == "catalan":
        out["triangles"] = oracle.witness(n, avail, adjacency=adj).triangles.tolist()
    _print(out)
    return 0


def cmd_geca(a) -> int:
    s = EdgeSampler(a.n, a.p, a.seed)
    r = clip.geca_run(range(1, a.n + 1), s.fast_query())
    _print({"success": r.success, "tau": r.tau, "complete": r.success and r.tau == a.n,
            "steps": r.steps, "max_list_len": r.max_list_len})
    return 0


def cmd_gta(a) -> int:
    s = EdgeSampler(a.n, a.p, a.seed)
    _print(clip.gta(a.n, s, _gta_params(a)).to_json(a.triangles))
    return 0


def _table(path):
    return beca.CompiledTable(None if path is None else beca.load_table(path))


def cmd_beca(a) -> int:
    if a.action == "validate":
        t = beca.default_move_table() if a.table is None else beca.load_table(a.table)
        report = beca.validate_table(t)
        _print(report.to_json())
        return 0 if report.passed else 2
    s = EdgeSampler(a.n, a.p, a.seed)
    r = beca.beca_run(range(1, a.n + 1), s.fast_query(), _table(a.table))
    _print({"success": r.success, "tau": r.tau, "steps": r.steps, "max_list_len": r.max_list_len})
    return 0


def cmd_bta(a) -> int:
    s = EdgeSampler(a.n, a.p, a.seed)
    _print(beca.bta(a.n, s, _table(a.table), _gta_params(a)).to_json(a.triangles))
    return 0


def _config(a) -> harness.ExperimentConfig:
    if a.config:
        cfg = harness.ExperimentConfig.from_file(a.config)
        over = {}
        for key, val in (("algorithm", a.algorithm), ("n", a.n), ("p_grid", a.p),
                         ("trials", a.trials), ("master_seed", a.seed)):
            if val is not None:
                over[key] = val
        if a.no_timing:
            over["timing"] = False
        return harness.ExperimentConfig.from_dict({**cfg.to_dict(), **over})
    missing = [f for f in ("algorithm", "n", "p") if getattr(a, f) is None]
    if missing:
        raise UsageError("sweep needs --config or " + ", ".join("--" + m for m in missing))
    return harness.ExperimentConfig(
        a.algorithm, a.n, a.p, a.trials or 100, a.seed or 0, a.beta, a.root_limit,
        a.max_list_length, a.table, a.allow_large_oracle, not a.no_timing,
    )


def cmd_sweep(a) -> int:
    results = harness.run_trials(_config(a), threads=a.threads)
    text = harness.emit(results, a.format, a.out)
    if a.out is None:
        sys.stdout.write(text)
    return 0


def cmd_phalf(a) -> int:
    est = harness.estimate_p_half(
        a.algorithm, a.n, a.trials, a.tol, master_seed=a.seed, threads=a.threads,
        bracket=(a.lo, a.hi), beta=a.beta, root_limit=a.root_limit, table=a.table,
        allow_large_oracle=a.allow_large_oracle,
    )
    text = json.dumps(est.to_json(), indent=2) + "\n"
    if a.out:
        try:
            with open(a.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise harness.ExperimentError(f"cannot write {a.out}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0


def cmd_ruin(a) -> int:
    if a.action == "pstar":
        _print({"p_star": ruin.p_star()})
    elif a.action == "drift":
        _print({"p": a.p, "drift": ruin.drift_polynomial_eval(a.p)})
    else:
        d = ruin.JumpDistribution.parse(a.dist)
        lo, hi = ruin.feller_bounds(d, a.x, a.J)
        _print({"dist": {str(k): m for k, m in d.as_dict().items()}, "x": a.x, "J": a.J,
                "drift": ruin.drift(d), "alpha": ruin.char_root(d),
                "lower": lo, "upper": hi, "exact": ruin.exact_absorption(d, a.x, a.J)})
    return 0


def cmd_drift(a) -> int:
    t = beca.default_move_table() if a.table is None else beca.load_table(a.table)
    out = {"coefficients": beca.drift_polynomial(t), "p_star": ruin.p_star()}
    if a.p is not None:
        if not 0.0 < a.p < 1.0:
            raise UsageError("--p must lie in (0, 1)")
        d = beca.table_distribution(t, a.p)
        out.update(p=a.p, drift=ruin.drift(d),
                   distribution={str(k): m for k, m in d.as_dict().items()})
    _print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="catperc", description="Catalan percolation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exact", help="decide triangulability exactly")
    sp.add_argument("--edges", help="edge file: n, then one 'i j' diagonal per line")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rule", choices=("catalan", "oriented"), default="catalan")
    sp.add_argument("--witness", action="store_true")
    sp.add_argument("--allow-large-oracle", action="store_true")
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("geca", help="one greedy ear-clipping pass")
    _add_single_run(sp)
    sp.set_defaults(func=cmd_geca)

    sp = sub.add_parser("gta", help="greedy triangulation algorithm")
    _add_single_run(sp)
    _add_gta_flags(sp)
    sp.set_defaults(func=cmd_gta)

    sp = sub.add_parser("beca", help="move tables and single BECA passes")
    bsub = sp.add_subparsers(dest="action", required=True)
    v = bsub.add_parser("validate")
    v.add_argument("--table")
    r = bsub.add_parser("run")
    _add_single_run(r)
    r.add_argument("--table")
    sp.set_defaults(func=cmd_beca)

    sp = sub.add_parser("bta", help="triangulation with the BECA engine")
    _add_single_run(sp)
    _add_gta_flags(sp)
    sp.add_argument("--table")
    sp.set_defaults(func=cmd_bta)

    for name, func in (("sweep", cmd_sweep), ("phalf", cmd_phalf)):
        sp = sub.add_parser(name)
        sp.add_argument("--algorithm", choices=harness.ALGORITHMS, required=name == "phalf")
        sp.add_argument("--n", type=int, required=name == "phalf")
        sp.add_argument("--trials", type=int, default=None if name == "sweep" else 200)
        sp.add_argument("--seed", type=int, default=None if name == "sweep" else 0)
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--root-limit", type=float, default=0.5)
        sp.add_argument("--table")
        sp.add_argument("--allow-large-oracle", action="store_true")
        sp.set_defaults(func=func)
        if name == "sweep":
            sp.add_argument("--p", type=_floats, help="comma-separated grid")
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
            sp.add_argument("--config", help="JSON file with ExperimentConfig fields")
            sp.add_argument("--max-list-length", type=int)
            sp.add_argument("--no-timing", action="store_true",
                            help="leave mean_runtime_ms empty (byte-reproducible output)")
        else:
            sp.add_argument("--tol", type=float, default=0.01)
            sp.add_argument("--lo", type=float, default=0.0)
            sp.add_argument("--hi", type=float, default=1.0)

    sp = sub.add_parser("ruin", help="gambler's ruin analytics")
    rsub = sp.add_subparsers(dest="action", required=True)
    b = rsub.add_parser("bounds")
    b.add_argument("--dist", required=True, help='e.g. "-1:0.6,1:0.4"')
    b.add_argument("--x", type=int, required=True)
    b.add_argument("--J", type=int, required=True)
    rsub.add_parser("pstar")
    d = rsub.add_parser("drift")
    d.add_argument("--p", type=float, required=True)
    sp.set_defaults(func=cmd_ruin)

    sp = sub.add_parser("drift", help="BECA drift polynomial and step law")
    sp.add_argument("--p", type=float)
    sp.add_argument("--table")
    sp.set_defaults(func=cmd_drift)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    if getattr(a, "threads", 1) < 1:
        ap.error("--threads must be >= 1")
    try:
        return a.func(a)
    except (UsageError, ValueError) as exc:
        print(f"catperc: error: {exc}", file=sys.stderr)
        return 1
    except (harness.ExperimentError, OSError, ArithmeticError) as exc:
        print(f"catperc: experiment failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
