"""Greedy ear clipping (GECA) and the greedy triangulation algorithm (GTA).

GECA keeps a list ``(v1, ..., vm)`` running along the boundary. If the chord
``{v_{m-2}, v_m}`` is present, the ear at ``v_{m-1}`` is clipped; otherwise the
next boundary vertex is appended. The list length therefore does a +-1 walk
with down-step probability ``p``: each query involves the current list end and
a partner that has never been paired with it before.

GTA chains GECA runs from vertex 1 until a run closes on a vertex adjacent to
the whole buffer ``{n-b, ..., n}`` (the root), chains runs from the root until
one closes inside the buffer, then finishes with a fan from the root.
"""

from __future__ import annotations

import math
import time
from array import array
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .edges import Avail, EdgeSampler
from .oracle import Triangulation
from .ruin import JumpDistribution

OK, FAILED, CAPPED = 1, 0, -1


class Step(Enum):
    CLIPPED = "clipped"
    EXTENDED = "extended"
    MOVED = "moved"
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass
class ClipState:
    """Mutable state of one ear-clipping run over ``polygon``.

    ``cursor`` indexes the next polygon vertex to append; ``log`` holds the
    clipped triangles as vertex triples.
    """

    polygon: Sequence[int]
    ell: list[int]
    cursor: int
    log: list[tuple[int, int, int]] = field(default_factory=list)

    @classmethod
    def start(cls, polygon: Sequence[int], length: int = 3) -> "ClipState":
        if len(polygon) < length:
            raise ValueError(f"polygon needs at least {length} vertices")
        return cls(polygon, list(polygon[:length]), length)

    @property
    def m(self) -> int:
        return len(self.ell)

    @property
    def remaining(self) -> int:
        return len(self.polygon) - self.cursor

    @property
    def tau(self) -> int:
        """1-based polygon position of ``v_tau`` once the list has closed."""
        return self.polygon.index(self.ell[1]) + 1


def geca_step(state: ClipState, avail: Avail) -> Step:
    ell = state.ell
    if len(ell) < 3:
        raise ValueError(f"GECA step needs a list of length >= 3, got {len(ell)}")
    if avail(ell[-3], ell[-1]):
        state.log.append((ell[-3], ell[-2], ell[-1]))
        del ell[-2]
        return Step.SUCCESS if len(ell) == 2 else Step.CLIPPED
    if state.cursor >= len(state.polygon):
        return Step.FAILURE
    ell.append(state.polygon[state.cursor])
    state.cursor += 1
    return Step.EXTENDED


@dataclass
class RunStats:
    steps: int = 0
    max_len: int = 0
    trace: list | None = None


def _geca_loop(ell, nxt, last, query, log, stats: RunStats, cap=None):
    """GECA on consecutive integer positions ``nxt..last``; mutates ``ell`` and ``log``.

    Returns ``(status, nxt)``. With ``stats.trace`` set, appends -1/+1 per step.
    """
    steps = stats.steps
    max_len = max(stats.max_len, len(ell))
    trace = stats.trace
    try:
        while True:
            steps += 1
            if query(ell[-3], ell[-1]):
                c = ell.pop()
                b = ell.pop()
                log.extend((ell[-1], b, c))
                ell.append(c)
                if trace is not None:
                    trace.append(-1)
                if len(ell) == 2:
                    return OK, nxt
            else:
                if ell[-1] >= last:
                    return FAILED, nxt
                ell.append(nxt)
                nxt += 1
                if trace is not None:
                    trace.append(1)
                if len(ell) > max_len:
                    max_len = len(ell)
                    if cap is not None and max_len > cap:
                        return CAPPED, nxt
    finally:
        stats.steps = steps
        stats.max_len = max_len


@dataclass
class GecaResult:
    success: bool
    tau: int | None
    polygon_out: list[int]
    log: list[tuple[int, int, int]]
    steps: int
    max_list_len: int


def geca_run(polygon: Sequence[int], avail: Avail, *, trace: list | None = None) -> GecaResult:
    """One GECA pass from ``(v1, v2, v3)``; failure is a value, not an exception."""
    poly = list(polygon)
    N = len(poly)
    if N < 3:
        raise ValueError("polygon needs at least 3 vertices")
    flat = array("q")
    stats = RunStats(trace=trace)
    ell = [0, 1, 2]

    def q(a, b):
        return avail(poly[a], poly[b])

    status, _ = _geca_loop(ell, 3, N - 1, q, flat, stats)
    log = [(poly[flat[k]], poly[flat[k + 1]], poly[flat[k + 2]]) for k in range(0, len(flat), 3)]
    if status != OK:
        return GecaResult(False, None, poly, log, stats.steps, stats.max_len)
    tau = ell[1]
    return GecaResult(True, tau + 1, [poly[0]] + poly[tau:], log, stats.steps, stats.max_len)


def list_length_walk(p: float) -> JumpDistribution:
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got {p}")
    return JumpDistribution.from_dict({-1: p, 1: 1.0 - p})


def geca_step_trace(sampler: EdgeSampler, steps: int) -> list[int]:
    """List-length increments of the first ``steps`` GECA steps, chaining runs from vertex 1."""
    n = sampler.n
    q = sampler.fast_query()
    stats = RunStats(trace=[])
    log = array("q")
    ell, nxt = [1, 2, 3], 4
    while len(stats.trace) < steps:
        status, nxt = _geca_loop(ell, nxt, n, q, log, stats)
        if status != OK or nxt > n:
            break
        ell.append(nxt)
        nxt += 1
        del log[:]
    if len(stats.trace) < steps:
        raise ValueError(f"polygon too small: only {len(stats.trace)} steps available")
    return stats.trace[:steps]


@dataclass(frozen=True)
class GtaParams:
    """Knobs for GTA/BTA. ``beta=None`` picks ``1 / (2 ln(1/p))``."""

    beta: float | None = None
    root_limit: float = 0.5
    max_list_length: int | None = None

    def __post_init__(self):
        if self.beta is not None and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.root_limit <= 1.0:
            raise ValueError(f"root_limit must lie in (0, 1], got {self.root_limit}")


def default_beta(p: float) -> float:
    if p <= 0.0:
        return 1e-9
    if p >= 1.0:
        return 1.0
    return 1.0 / (2.0 * math.log(1.0 / p))


def buffer_size(n: int, p: float, beta: float | None = None) -> int:
    """``b = max(1, ceil(beta ln n))``, clipped so the buffer never exceeds n/4."""
    beta = default_beta(p) if beta is None else beta
    b = max(1, math.ceil(beta * math.log(n)))
    return min(b, max(1, n // 4))


@dataclass
class TriangulationResult:
    success: bool
    reason: str | None
    triangulation: Triangulation | None
    steps: int
    max_list_len: int
    root: int | None = None
    runs: int = 0
    buffer: int = 0
    runtime_s: float = 0.0

    def to_json(self, with_triangles: bool = False) -> dict:
        out = {
            "success": self.success,
            "reason": self.reason,
            "steps": self.steps,
            "max_list_len": self.max_list_len,
            "root": self.root,
            "runs": self.runs,
            "buffer": self.buffer,
        }
        if with_triangles and self.triangulation is not None:
            out["triangles"] = self.triangulation.triangles.tolist()
        return out


InnerLoop = Callable[..., tuple[int, int]]


def run_skeleton(
    n: int,
    sampler: EdgeSampler,
    params: GtaParams,
    inner: InnerLoop,
    start_len: int,
    min_n: int,
) -> TriangulationResult:
    """Root finding, completion and fan, with ``inner`` as the ear-clipping engine."""
    if n < min_n:
        raise ValueError(f"need n >= {min_n}, got {n}")
    if sampler.n != n:
        raise ValueError(f"sampler has n={sampler.n}, expected {n}")
    t0 = time.perf_counter()
    b = buffer_size(n, sampler.p, params.beta)
    buf_lo = n - b
    limit = max(start_len, int(params.root_limit * n))
    q = sampler.fast_query()
    log = array("q")
    stats = RunStats()
    cap = params.max_list_length
    runs = 0

    def done(success, reason, rho=None):
        tri = None
        if success:
            tri = Triangulation.from_triples(n, np.frombuffer(log, dtype=np.int64).reshape(-1, 3))
        return TriangulationResult(
            success, reason, tri, stats.steps, stats.max_len, rho, runs, b,
            time.perf_counter() - t0,
        )

    def fail_reason(status, phase_reason):
        return "list-cap-exceeded" if status == CAPPED else phase_reason

    # root finding
    ell = list(range(1, start_len + 1))
    nxt = start_len + 1
    while True:
        status, nxt = inner(ell, nxt, n, q, log, stats, cap)
        runs += 1
        if status != OK:
            return done(False, fail_reason(status, "geca-failed"))
        v = ell[1]
        if v == n:
            return done(True, None)
        if v > limit:
            return done(False, "no-root-before-limit")
        if all(q(v, w) for w in range(buf_lo, n + 1)):
            rho = v
            break
        ell.extend(range(nxt, nxt + start_len - 2))
        nxt += start_len - 2

    # completion on P_rho = (rho, ..., n)
    ell = list(range(rho, rho + start_len))
    nxt = rho + start_len
    while True:
        status, nxt = inner(ell, nxt, n, q, log, stats, cap)
        runs += 1
        if status != OK:
            return done(False, fail_reason(status, "completion-overran-buffer"), rho)
        u = ell[1]
        if u >= buf_lo:
            break
        ell.extend(range(nxt, nxt + start_len - 2))
        nxt += start_len - 2

    # fan from the root over the rest of the buffer
    for w in range(u, n):
        log.extend((rho, w, w + 1))
    log.extend((1, rho, n))
    return done(True, None, rho)


def gta(n: int, sampler: EdgeSampler, params: GtaParams = GtaParams()) -> TriangulationResult:
    """Greedy triangulation; a success output only uses sampler-present diagonals."""
    return run_skeleton(n, sampler, params, _geca_loop, 3, 16)
