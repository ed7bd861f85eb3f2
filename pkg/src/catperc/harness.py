"""Monte Carlo experiments over the triangulation algorithms.

Trial ``i`` of a block with master seed ``s`` uses the edge seed
``mix64(s + i)``; the same seeds are reused at every ``p`` of a grid, so curves
are monotone-coupled and algorithms can be compared seed by seed. Results are
aggregated in trial order, so the worker count never changes the output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from statsmodels.stats.proportion import proportion_confint

from .beca import CompiledTable, bta, load_table
from .clip import GtaParams, geca_run, gta
from .edges import MASK64, EdgeSampler, mix64
from .oracle import can_triangulate

ALGORITHMS = ("oracle", "oriented-oracle", "gta", "bta", "geca")
ORACLE_ALGORITHMS = ("oracle", "oriented-oracle")
ORACLE_N_CAP = 3000
CSV_COLUMNS = (
    "algorithm", "n", "p", "trials", "successes", "estimate",
    "ci_low", "ci_high", "mean_runtime_ms", "seed",
)


class ExperimentError(RuntimeError):
    """An experiment could not produce a result (as opposed to bad input)."""


def trial_seed(master_seed: int, index: int) -> int:
    return mix64((master_seed + index) & MASK64)


def block_seed(master_seed: int, block: int) -> int:
    """Master seed of the ``block``-th fresh trial block derived from ``master_seed``."""
    return mix64((master_seed ^ mix64(block + 1)) & MASK64)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    n: int
    p_grid: tuple[float, ...]
    trials: int
    master_seed: int = 0
    beta: float | None = None
    root_limit: float = 0.5
    max_list_length: int | None = None
    table: str | None = None
    allow_large_oracle: bool = False
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.p_grid:
            raise ValueError("empty p grid")
        for p in self.p_grid:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p values must lie in [0, 1], got {p}")
        if self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        if (self.algorithm in ORACLE_ALGORITHMS and self.n > ORACLE_N_CAP
                and not self.allow_large_oracle):
            raise ValueError(
                f"oracle is capped at n <= {ORACLE_N_CAP} (got {self.n}); "
                "set allow_large_oracle to override"
            )
        self.gta_params()  # validates beta / root_limit

    def gta_params(self) -> GtaParams:
        return GtaParams(self.beta, self.root_limit, self.max_list_length)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        data = dict(data)
        if "p_grid" in data and isinstance(data["p_grid"], (int, float)):
            data["p_grid"] = [data["p_grid"]]
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: cannot read config: {exc}") from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p_grid"] = list(self.p_grid)
        return out


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    runtime_s: float
    max_list_len: int


@dataclass(frozen=True)
class TrialSummary:
    algorithm: str
    n: int
    p: float
    trials: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    mean_runtime_ms: float | None
    seed: int
    mean_max_list_len: float = 0.0

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}

    def to_json(self) -> dict:
        out = self.row()
        out["mean_max_list_len"] = self.mean_max_list_len
        return out


def wilson(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    # guard float fuzz at 0 and 1 so the interval always contains the estimate
    est = successes / trials
    return max(0.0, min(float(lo), est)), min(1.0, max(float(hi), est))


@lru_cache(maxsize=8)
def _compiled(table: str | None) -> CompiledTable:
    return CompiledTable(None if table is None else load_table(table))


@lru_cache(maxsize=None)
def _warm_oracle() -> None:
    # load the compiled kernels once so their start-up cost stays out of the timings
    s = EdgeSampler(8, 0.5, 0)
    can_triangulate(8, s, adjacency=s.adjacency())
    can_triangulate(8, s, rule="oriented", adjacency=s.adjacency())


def run_one(algorithm: str, n: int, p: float, seed: int, params: GtaParams = GtaParams(),
            table: str | None = None) -> TrialOutcome:
    """A single trial on the edge set with the given seed."""
    sampler = EdgeSampler(n, p, seed)
    if algorithm in ORACLE_ALGORITHMS:
        _warm_oracle()
    t0 = time.perf_counter()
    max_len = 0
    if algorithm == "oracle":
        ok = can_triangulate(n, sampler, adjacency=sampler.adjacency())
    elif algorithm == "oriented-oracle":
        ok = can_triangulate(n, sampler, rule="oriented", adjacency=sampler.adjacency())
    elif algorithm == "gta":
        res = gta(n, sampler, params)
        ok, max_len = res.success, res.max_list_len
    elif algorithm == "bta":
        res = bta(n, sampler, _compiled(table), params)
        ok, max_len = res.success, res.max_list_len
    elif algorithm == "geca":
        res = geca_run(range(1, n + 1), sampler.fast_query())
        ok, max_len = res.success, res.max_list_len
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return TrialOutcome(bool(ok), time.perf_counter() - t0, max_len)


def _run_chunk(args) -> list[TrialOutcome]:
    algorithm, n, p, master_seed, start, stop, params, table = args
    return [
        run_one(algorithm, n, p, trial_seed(master_seed, i), params, table)
        for i in range(start, stop)
    ]


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    k = max(1, min(trials, workers * 4))
    edges = [trials * j // k for j in range(k + 1)]
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def trial_outcomes(cfg: ExperimentConfig, p: float, *, master_seed: int | None = None,
                   threads: int = 1, pool: ProcessPoolExecutor | None = None) -> list[TrialOutcome]:
    """Per-trial outcomes in trial order."""
    seed = cfg.master_seed if master_seed is None else master_seed
    params = cfg.gta_params()
    jobs = [(cfg.algorithm, cfg.n, p, seed, a, b, params, cfg.table)
            for a, b in _chunks(cfg.trials, threads)]
    if pool is None and threads <= 1:
        parts = [_run_chunk(job) for job in jobs]
    elif pool is not None:
        parts = list(pool.map(_run_chunk, jobs))
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    return [o for part in parts for o in part]


def summarize(cfg: ExperimentConfig, p: float, seed: int,
              outcomes: Sequence[TrialOutcome]) -> TrialSummary:
    t = len(outcomes)
    s = sum(o.success for o in outcomes)
    lo, hi = wilson(s, t)
    runtime = math.fsum(o.runtime_s for o in outcomes) / t * 1e3 if cfg.timing else None
    return TrialSummary(
        cfg.algorithm, cfg.n, p, t, s, s / t, lo, hi, runtime, seed,
        sum(o.max_list_len for o in outcomes) / t,
    )


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> list[TrialSummary]:
    """One summary per grid point; identical output for any ``threads``."""
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        return [
            summarize(cfg, p, cfg.master_seed, trial_outcomes(cfg, p, threads=threads, pool=pool))
            for p in cfg.p_grid
        ]
    finally:
        if pool is not None:
            pool.shutdown()


def paired_outcomes(algorithms: Sequence[str], n: int, p: float, trials: int,
                    master_seed: int = 0, threads: int = 1, **opts) -> dict[str, list[bool]]:
    """Success flags of several algorithms on the same trial seeds."""
    out = {}
    for alg in algorithms:
        cfg = ExperimentConfig(alg, n, (p,), trials, master_seed, **opts)
        out[alg] = [o.success for o in trial_outcomes(cfg, p, threads=threads)]
    return out


@dataclass
class PHalfEstimate:
    algorithm: str
    n: int
    p_hat: float
    ci_low: float
    ci_high: float
    probes: list[TrialSummary] = field(default_factory=list)
    attempts: int = 1

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "attempts": self.attempts,
            "probes": [s.to_json() for s in self.probes],
        }


def estimate_p_half(
    algorithm: str,
    n: int,
    trials: int,
    tol: float,
    *,
    master_seed: int = 0,
    bracket: tuple[float, float] = (0.0, 1.0),
    threads: int = 1,
    max_blocks: int = 8,
    attempts: int = 3,
    **opts,
) -> PHalfEstimate:
    """Locate the ``p`` where the success probability crosses 1/2.

    Each probe draws fresh trial blocks until its Wilson interval excludes 1/2
    (at most ``max_blocks`` blocks). Bisection keeps a bracket ``[lo, hi]`` with
    ``lo`` significantly below and ``hi`` significantly above 1/2, and stops once
    the bracket is no wider than ``tol``; that bracket is the reported interval.
    A probe that stays ambiguous is refined at ``mid -+ tol/2``. Inconsistent
    probes restart from a wider bracket with doubled blocks.
    """
    if tol < 0.005:
        raise ValueError(f"tol must be >= 0.005, got {tol}")
    lo0, hi0 = bracket
    if not 0.0 <= lo0 < hi0 <= 1.0:
        raise ValueError(f"bad bracket {bracket}")
    base = ExperimentConfig(algorithm, n, (lo0,), trials, master_seed, **opts)
    probes: list[TrialSummary] = []
    counter = [0]
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None

    def classify(p: float, blocks: int) -> tuple[int, TrialSummary]:
        outcomes: list[TrialOutcome] = []
        for _ in range(blocks):
            counter[0] += 1
            seed = block_seed(master_seed, counter[0])
            outcomes += trial_outcomes(base, p, master_seed=seed, threads=threads, pool=pool)
            summary = summarize(replace(base, p_grid=(p,)), p, seed, outcomes)
            if summary.ci_high < 0.5:
                probes.append(summary)
                return -1, summary
            if summary.ci_low > 0.5:
                probes.append(summary)
                return 1, summary
        probes.append(summary)
        return 0, summary

    def crossing(lo_s: TrialSummary, hi_s: TrialSummary) -> float:
        a, b = lo_s.estimate, hi_s.estimate
        if b <= a:
            return 0.5 * (lo_s.p + hi_s.p)
        return lo_s.p + (0.5 - a) / (b - a) * (hi_s.p - lo_s.p)

    try:
        for attempt in range(attempts):
            widen = attempt * 2 * tol
            lo = max(0.0, lo0 - widen)
            hi = min(1.0, hi0 + widen)
            blocks = max_blocks * 2**attempt
            s_lo, lo_sum = classify(lo, blocks)
            s_hi, hi_sum = classify(hi, blocks)
            if s_lo != -1 or s_hi != 1:
                continue
            consistent = True
            while hi - lo > tol + 1e-12:
                mid = 0.5 * (lo + hi)
                s, summ = classify(mid, blocks)
                if s < 0:
                    lo, lo_sum = mid, summ
                elif s > 0:
                    hi, hi_sum = mid, summ
                else:
                    a = max(lo, mid - tol / 2)
                    b = min(hi, mid + tol / 2)
                    sa, suma = classify(a, blocks) if a > lo else (-1, lo_sum)
                    sb, sumb = classify(b, blocks) if b < hi else (1, hi_sum)
                    if sa == -1 and sb == 1:
                        lo, lo_sum, hi, hi_sum = a, suma, b, sumb
                        break
                    consistent = False
                    break
            if consistent:
                return PHalfEstimate(algorithm, n, crossing(lo_sum, hi_sum), lo, hi,
                                     probes, attempt + 1)
        raise ExperimentError(
            f"could not isolate the 1/2 crossing of {algorithm} at n={n} within "
            f"tol={tol} after {attempts} attempts"
        )
    finally:
        if pool is not None:
            pool.shutdown()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(results: Sequence[TrialSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerow([_fmt(v) for v in r.row().values()])
    return buf.getvalue()


def format_json(results: Sequence[TrialSummary]) -> str:
    return json.dumps([r.to_json() for r in results], indent=2) + "\n"


def emit(results: Sequence[TrialSummary], fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render results as CSV or JSON; write to ``path`` when given. Returns the text."""
    if fmt == "csv":
        text = format_csv(results)
    elif fmt == "json":
        text = format_json(results)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise ExperimentError(f"cannot write {path}: {exc}") from exc
    return text


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
