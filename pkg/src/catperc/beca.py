"""Better ear clipping (BECA) driven by a declarative move table.

A step looks at the last four list vertices ``e3 e2 e1 e0`` (``e0`` is the list
end) and the next three boundary vertices ``f1 f2 f3``. It walks a decision
tree of edge queries, and the leaf it reaches (a *move*) says which triangles to
emit, how many forward vertices to absorb and how the list length changes.

The default table has seven moves. Their probabilities and length changes
reproduce the drift ``2p^6 - 6p^5 + 4p^4 + 5p^3 - 9p^2 + p + 1`` exactly. Every
query touches ``e0`` or a forward vertex, and no move reveals a pair that the
following step could ask about again. The list-length process is therefore a
random walk with the table's step law. :func:`validate_table` machine-checks
all of this.

Table text format, one move per line (``#`` starts a comment)::

    name | +e2.e0 -e3.e0 | delta | consumed | e2.e1.e0 e3.e2.e0

Queries are ``+a.b`` (must be present) or ``-a.b`` (must be absent), listed in
the order they are revealed; triangles are dotted position triples.
"""

from __future__ import annotations

import itertools
import math
from array import array
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .clip import (
    CAPPED, FAILED, OK, ClipState, GecaResult, GtaParams, RunStats, Step,
    TriangulationResult, run_skeleton,
)
from .edges import Avail, EdgeSampler
from .oracle import Triangulation, validate_triangulation
from .ruin import DRIFT_COEFFS, JumpDistribution

LIST_POSITIONS = ("e3", "e2", "e1", "e0")
FORWARD_POSITIONS = ("f1", "f2", "f3")
POSITIONS = LIST_POSITIONS + FORWARD_POSITIONS
MAX_FORWARD = 3


def _token(pos: str) -> int:
    """``e_k -> -(k+1)`` (an index into the list), ``f_k -> k``."""
    if pos not in POSITIONS:
        raise ValueError(f"unknown position {pos!r}")
    k = int(pos[1])
    return -(k + 1) if pos[0] == "e" else k


def _order(pos: str) -> int:
    return 3 - int(pos[1]) if pos[0] == "e" else 3 + int(pos[1])


@dataclass(frozen=True)
class EdgeQuery:
    a: str
    b: str
    present: bool

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    def __str__(self) -> str:
        return f"{'+' if self.present else '-'}{self.a}.{self.b}"


@dataclass(frozen=True)
class Move:
    name: str
    pattern: tuple[EdgeQuery, ...]
    delta: int
    consumed: int
    triangles: tuple[tuple[str, str, str], ...] = ()

    @property
    def monomial(self) -> tuple[int, int]:
        """Exponents ``(a, b)`` of ``p**a * q**b``."""
        a = sum(1 for e in self.pattern if e.present)
        return a, len(self.pattern) - a

    def probability(self, p: float) -> float:
        a, b = self.monomial
        return p**a * (1.0 - p) ** b


@dataclass(frozen=True)
class MoveTable:
    moves: tuple[Move, ...]

    def __len__(self) -> int:
        return len(self.moves)


# --- polynomials in p with integer coefficients, constant term first ---------

def _pmul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _padd(a: list[int], b: list[int]) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] += x
    return out


def _trim(a: list[int]) -> list[int]:
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def monomial_poly(a: int, b: int) -> list[int]:
    """Expand ``p**a (1-p)**b``."""
    out = [1]
    for _ in range(a):
        out = _pmul(out, [0, 1])
    for _ in range(b):
        out = _pmul(out, [1, -1])
    return out


def mass_polynomial(t: MoveTable) -> list[int]:
    total = [0]
    for mv in t.moves:
        total = _padd(total, monomial_poly(*mv.monomial))
    return _trim(total)


def drift_polynomial(t: MoveTable) -> list[int]:
    total = [0]
    for mv in t.moves:
        total = _padd(total, [mv.delta * c for c in monomial_poly(*mv.monomial)])
    return _trim(total)


# --- text format ---------------------------------------------------------------

def _parse_query(tok: str) -> EdgeQuery:
    if tok[0] not in "+-":
        raise ValueError(f"query {tok!r} must start with + or -")
    a, sep, b = tok[1:].partition(".")
    if not sep:
        raise ValueError(f"query {tok!r} must look like +a.b")
    _token(a), _token(b)
    return EdgeQuery(a, b, tok[0] == "+")


def parse_table(text: str) -> MoveTable:
    moves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 5:
            raise ValueError(f"line {lineno}: expected 5 '|'-separated fields, got {len(fields)}")
        name, queries, delta, consumed, tris = fields
        try:
            pattern = tuple(_parse_query(tok) for tok in queries.split())
            triangles = []
            for tok in tris.split():
                parts = tuple(tok.split("."))
                if len(parts) != 3:
                    raise ValueError(f"triangle {tok!r} needs three positions")
                for pos in parts:
                    _token(pos)
                triangles.append(parts)
            moves.append(Move(name, pattern, int(delta), int(consumed), tuple(triangles)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return MoveTable(tuple(moves))


def format_table(t: MoveTable) -> str:
    lines = ["# name | queries | delta | consumed | triangles"]
    for mv in t.moves:
        lines.append(" | ".join([
            mv.name,
            " ".join(str(e) for e in mv.pattern),
            f"{mv.delta:+d}",
            str(mv.consumed),
            " ".join(".".join(tri) for tri in mv.triangles),
        ]))
    return "\n".join(lines) + "\n"


def load_table(path: str | Path) -> MoveTable:
    return parse_table(Path(path).read_text())


DEFAULT_TABLE_TEXT = """\
# name              | queries                                     | delta | consumed | triangles
extend              | -e2.e0                                      | +1 | 1 |
double-clip         | +e2.e0 +e3.e0                               | -2 | 0 | e2.e1.e0 e3.e2.e0
clip-reach-clip     | +e2.e0 -e3.e0 +e2.f1                        | -1 | 1 | e2.e1.e0 e2.e0.f1
clip-skip-clip      | +e2.e0 -e3.e0 -e2.f1 +e0.f2                 | +0 | 2 | e2.e1.e0 e0.f1.f2
clip-run-out        | +e2.e0 -e3.e0 -e2.f1 -e0.f2 -e1.f1          | +2 | 3 | e2.e1.e0
hold-fan            | +e2.e0 -e3.e0 -e2.f1 -e0.f2 +e1.f1 +e1.f2   | +0 | 2 | e1.e0.f1 e1.f1.f2
hold-clip-run-out   | +e2.e0 -e3.e0 -e2.f1 -e0.f2 +e1.f1 -e1.f2   | +2 | 3 | e1.e0.f1
"""

GECA_TABLE_TEXT = """\
clip   | +e2.e0 | -1 | 0 | e2.e1.e0
extend | -e2.e0 | +1 | 1 |
"""


def default_move_table() -> MoveTable:
    return parse_table(DEFAULT_TABLE_TEXT)


def geca_move_table() -> MoveTable:
    """Plain greedy clipping written as a two-move table (drift ``1 - 2p``)."""
    return parse_table(GECA_TABLE_TEXT)


# --- structure -------------------------------------------------------------------

def _path(mv: Move) -> list[str]:
    return list(LIST_POSITIONS) + [f"f{k}" for k in range(1, mv.consumed + 1)]


def derive_chain(mv: Move) -> list[str]:
    """New list suffix (as old positions) implied by the move's triangles."""
    path = _path(mv)
    where = {pos: i for i, pos in enumerate(path)}
    for tri in mv.triangles:
        for pos in tri:
            if pos not in where:
                raise ValueError(f"{mv.name}: triangle vertex {pos} outside the absorbed path")
    uses: dict[frozenset, int] = {}
    for a, b, c in mv.triangles:
        for e in (frozenset((a, b)), frozenset((b, c)), frozenset((a, c))):
            uses[e] = uses.get(e, 0) + 1
    path_edges = {frozenset((path[i], path[i + 1])) for i in range(len(path) - 1)}
    chain = [path[0]]
    cur = path[0]
    while cur != path[-1]:
        jumps = [
            other
            for e, cnt in uses.items()
            if cnt == 1 and cur in e and e not in path_edges
            for other in e - {cur}
            if where[other] > where[cur]
        ]
        if len(jumps) > 1:
            raise ValueError(f"{mv.name}: ambiguous chords leave {cur}")
        cur = jumps[0] if jumps else path[where[cur] + 1]
        chain.append(cur)
    return chain


def _structure_issues(mv: Move) -> list[str]:
    issues = []
    if not 0 <= mv.consumed <= MAX_FORWARD:
        return [f"{mv.name}: consumed={mv.consumed} outside [0, {MAX_FORWARD}]"]
    if not mv.triangles and mv.consumed == 0:
        issues.append(f"{mv.name}: makes no progress (no triangle, no forward vertex)")
    pairs = [e.pair for e in mv.pattern]
    if any(len(pr) != 2 for pr in pairs):
        issues.append(f"{mv.name}: query with identical endpoints")
    if len(set(pairs)) != len(pairs):
        issues.append(f"{mv.name}: pair queried twice")
    try:
        chain = derive_chain(mv)
    except ValueError as exc:
        return issues + [str(exc)]
    if len(chain) - len(LIST_POSITIONS) != mv.delta:
        issues.append(
            f"{mv.name}: declared delta {mv.delta:+d} but triangles give {len(chain) - 4:+d}"
        )
    if chain[0] != "e3":
        issues.append(f"{mv.name}: e3 must stay in the list")
    path = _path(mv)
    where = {pos: i for i, pos in enumerate(path)}
    present = {e.pair for e in mv.pattern if e.present}
    used = 0
    for x, y in zip(chain, chain[1:]):
        seg = path[where[x]: where[y] + 1]
        if len(seg) == 2:
            continue
        if frozenset((x, y)) not in present:
            issues.append(f"{mv.name}: closing chord {x}.{y} not revealed present")
        label = {pos: i + 1 for i, pos in enumerate(seg)}
        inside = [t for t in mv.triangles if all(v in label for v in t)]
        used += len(inside)
        segset = set(seg)
        seg_edges = {frozenset((seg[i], seg[i + 1])) for i in range(len(seg) - 1)}

        def ok(i, j, _seg=seg, _present=present, _edges=seg_edges):
            pr = frozenset((_seg[i - 1], _seg[j - 1]))
            return pr in _edges or pr in _present

        tri = Triangulation.from_triples(len(seg), [[label[v] for v in t] for t in inside])
        if not segset or not validate_triangulation(len(seg), tri, ok):
            issues.append(f"{mv.name}: triangles do not triangulate {'-'.join(seg)}")
    if used != len(mv.triangles):
        issues.append(f"{mv.name}: triangles outside the clipped region")
    return issues


def _markov_issues(t: MoveTable) -> list[str]:
    issues = []
    back = sorted({
        int(other[1])
        for mv in t.moves
        for e in mv.pattern
        if "e0" in e.pair and len(e.pair) == 2
        for other in e.pair - {"e0"}
        if other[0] == "e"
    })
    for mv in t.moves:
        for e in mv.pattern:
            if not ("e0" in e.pair or any(pos[0] == "f" for pos in e.pair)):
                issues.append(f"{mv.name}: query {e} touches neither e0 nor a forward vertex")
            for pos in e.pair:
                if pos[0] == "f" and int(pos[1]) > mv.consumed:
                    issues.append(f"{mv.name}: query {e} reveals {pos} beyond the new list end")
        try:
            chain = derive_chain(mv)
        except ValueError:
            continue
        revealed = {e.pair for e in mv.pattern}
        for k in back:
            if k + 1 <= len(chain):
                pair = frozenset((chain[-1 - k], chain[-1]))
                if len(pair) == 2 and pair in revealed:
                    issues.append(
                        f"{mv.name}: next step may re-reveal {'.'.join(sorted(pair, key=_order))}"
                    )
    return issues


class _Leaf:
    __slots__ = ("index", "chain", "tris", "consumed", "delta")

    def __init__(self, index, mv: Move):
        self.index = index
        self.chain = tuple(_token(p) for p in derive_chain(mv))
        self.tris = tuple(tuple(_token(p) for p in tri) for tri in mv.triangles)
        self.consumed = mv.consumed
        self.delta = mv.delta


def compile_tree(t: MoveTable):
    """Build the query trie; internal nodes are ``(a, b, if_present, if_absent)`` tuples."""

    def build(idx: list[int], depth: int):
        done = [i for i in idx if len(t.moves[i].pattern) == depth]
        if done:
            if len(idx) > 1:
                names = ", ".join(t.moves[i].name for i in idx)
                raise ValueError(f"moves not separated by the decision tree: {names}")
            return _Leaf(idx[0], t.moves[idx[0]])
        heads = {t.moves[i].pattern[depth].pair for i in idx}
        if len(heads) != 1:
            names = ", ".join(t.moves[i].name for i in idx)
            raise ValueError(f"moves disagree on the query at depth {depth}: {names}")
        q = t.moves[idx[0]].pattern[depth]
        yes = [i for i in idx if t.moves[i].pattern[depth].present]
        no = [i for i in idx if not t.moves[i].pattern[depth].present]
        if not yes or not no:
            raise ValueError(f"query {q.a}.{q.b} at depth {depth} has an uncovered branch")
        return (_token(q.a), _token(q.b), build(yes, depth + 1), build(no, depth + 1))

    if not t.moves:
        raise ValueError("empty move table")
    return build(list(range(len(t.moves))), 0)


def _tree_issues(t: MoveTable) -> list[str]:
    issues = []
    pairs = sorted({e.pair for mv in t.moves for e in mv.pattern}, key=lambda s: sorted(s))
    if len(pairs) > 20:
        return [f"too many distinct queries ({len(pairs)}) to enumerate"]
    index = {pr: i for i, pr in enumerate(pairs)}
    overlap = gaps = 0
    for bits in itertools.product((False, True), repeat=len(pairs)):
        hits = sum(
            all(bits[index[e.pair]] == e.present for e in mv.pattern) for mv in t.moves
        )
        overlap += hits > 1
        gaps += hits == 0
    if overlap:
        issues.append(f"{overlap} revelation outcomes match more than one move")
    if gaps:
        issues.append(f"{gaps} revelation outcomes match no move")
    try:
        compile_tree(t)
    except ValueError as exc:
        issues.append(str(exc))
    return issues


@dataclass
class ValidationReport:
    sum_to_one: bool
    mass_coefficients: list[int]
    drift_coefficients: list[int]
    target: list[int]
    drift_matches: bool
    tree_ok: bool
    structure_ok: bool
    markov_ok: bool
    issues: list[str] = field(default_factory=list)

    @property
    def well_formed(self) -> bool:
        return self.sum_to_one and self.tree_ok and self.structure_ok and self.markov_ok

    @property
    def passed(self) -> bool:
        return self.well_formed and self.drift_matches

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "sum_to_one": self.sum_to_one,
            "mass_coefficients": self.mass_coefficients,
            "drift_coefficients": self.drift_coefficients,
            "target": self.target,
            "drift_matches": self.drift_matches,
            "tree_ok": self.tree_ok,
            "structure_ok": self.structure_ok,
            "markov_ok": self.markov_ok,
            "issues": self.issues,
        }


def validate_table(t: MoveTable, target: Sequence[int] = DRIFT_COEFFS) -> ValidationReport:
    mass = mass_polynomial(t)
    drift = drift_polynomial(t)
    tree = _tree_issues(t)
    structure = [msg for mv in t.moves for msg in _structure_issues(mv)]
    markov = _markov_issues(t)
    target = _trim(list(target))
    sum_ok = mass == [1]
    issues = list(tree) + structure + markov
    if not sum_ok:
        issues.insert(0, f"move probabilities sum to {mass}, not 1")
    if drift != target:
        issues.append(f"drift coefficients {drift} differ from target {target}")
    return ValidationReport(
        sum_to_one=sum_ok,
        mass_coefficients=mass,
        drift_coefficients=drift,
        target=target,
        drift_matches=drift == target,
        tree_ok=not tree,
        structure_ok=not structure,
        markov_ok=not markov,
        issues=issues,
    )


def table_distribution(t: MoveTable, p: float) -> JumpDistribution:
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got {p}")
    report = validate_table(t)
    if not report.well_formed:
        raise ValueError("invalid move table: " + "; ".join(report.issues))
    law: dict[int, list[float]] = {}
    for mv in t.moves:
        law.setdefault(mv.delta, []).append(mv.probability(p))
    return JumpDistribution.from_dict({k: math.fsum(v) for k, v in law.items()})


# --- engines -------------------------------------------------------------------

@dataclass(frozen=True)
class BecaOutcome:
    step: Step
    move: int
    delta: int


class CompiledTable:
    """A validated table ready to run; compile once, share across runs."""

    def __init__(self, t: MoveTable | None = None):
        t = default_move_table() if t is None else t
        report = validate_table(t)
        if not report.well_formed:
            raise ValueError("invalid move table: " + "; ".join(report.issues))
        self.table = t
        self.root = compile_tree(t)

    def walk(self, resolve, query) -> _Leaf:
        node = self.root
        while type(node) is tuple:
            a, b, yes, no = node
            node = yes if query(resolve(a), resolve(b)) else no
        return node


def beca_step(state: ClipState, table: CompiledTable, avail: Avail) -> BecaOutcome:
    ell = state.ell
    if len(ell) < 4:
        raise ValueError(f"BECA step needs a list of length >= 4, got {len(ell)}")
    if state.remaining < MAX_FORWARD:
        raise ValueError("BECA step needs three forward vertices")
    poly, cur = state.polygon, state.cursor

    def resolve(tok):
        return ell[tok] if tok < 0 else poly[cur + tok - 1]

    leaf = table.walk(resolve, avail)
    suffix = [resolve(tok) for tok in leaf.chain]
    state.log.extend(tuple(resolve(tok) for tok in tri) for tri in leaf.tris)
    ell[-4:] = suffix
    state.cursor += leaf.consumed
    if len(ell) == 2:
        return BecaOutcome(Step.SUCCESS, leaf.index, leaf.delta)
    if len(ell) == 3 and state.remaining > 0:
        ell.append(poly[state.cursor])
        state.cursor += 1
    return BecaOutcome(Step.MOVED, leaf.index, leaf.delta)


def make_beca_loop(table: CompiledTable):
    """Inner loop over consecutive positions, falling back to GECA near the end.

    With ``stats.trace`` set, appends the move index of every BECA step.
    """
    root = table.root

    def loop(ell, nxt, last, query, log, stats: RunStats, cap=None):
        steps = stats.steps
        max_len = max(stats.max_len, len(ell))
        trace = stats.trace
        try:
            while True:
                steps += 1
                if len(ell) >= 4 and nxt + 2 <= last:
                    node = root
                    while type(node) is tuple:
                        a, b, yes, no = node
                        va = ell[a] if a < 0 else nxt + a - 1
                        vb = ell[b] if b < 0 else nxt + b - 1
                        node = yes if query(va, vb) else no
                    suffix = [ell[t] if t < 0 else nxt + t - 1 for t in node.chain]
                    for tri in node.tris:
                        for t in tri:
                            log.append(ell[t] if t < 0 else nxt + t - 1)
                    ell[-4:] = suffix
                    nxt += node.consumed
                    if trace is not None:
                        trace.append(node.index)
                    if len(ell) == 2:
                        return OK, nxt
                    if len(ell) == 3 and nxt <= last:
                        ell.append(nxt)
                        nxt += 1
                elif query(ell[-3], ell[-1]):
                    c = ell.pop()
                    b = ell.pop()
                    log.extend((ell[-1], b, c))
                    ell.append(c)
                    if len(ell) == 2:
                        return OK, nxt
                else:
                    if ell[-1] >= last:
                        return FAILED, nxt
                    ell.append(nxt)
                    nxt += 1
                if len(ell) > max_len:
                    max_len = len(ell)
                    if cap is not None and max_len > cap:
                        return CAPPED, nxt
        finally:
            stats.steps = steps
            stats.max_len = max_len

    return loop


def beca_run(
    polygon: Sequence[int],
    avail: Avail,
    table: CompiledTable | None = None,
    *,
    trace: list | None = None,
) -> GecaResult:
    """One BECA pass from ``(v1, v2, v3, v4)``; GECA steps where BECA lacks room."""
    from .clip import _geca_loop

    poly = list(polygon)
    N = len(poly)
    if N < 3:
        raise ValueError("polygon needs at least 3 vertices")
    table = CompiledTable() if table is None else table
    flat = array("q")
    stats = RunStats(trace=trace)

    def q(a, b):
        return avail(poly[a], poly[b])

    if N == 3:
        ell = [0, 1, 2]
        status, _ = _geca_loop(ell, 3, N - 1, q, flat, stats)
    else:
        ell = [0, 1, 2, 3]
        status, _ = make_beca_loop(table)(ell, 4, N - 1, q, flat, stats)
    log = [(poly[flat[k]], poly[flat[k + 1]], poly[flat[k + 2]]) for k in range(0, len(flat), 3)]
    if status != OK:
        return GecaResult(False, None, poly, log, stats.steps, stats.max_len)
    tau = ell[1]
    return GecaResult(True, tau + 1, [poly[0]] + poly[tau:], log, stats.steps, stats.max_len)


def beca_step_trace(sampler: EdgeSampler, steps: int, table: CompiledTable | None = None,
                    query=None) -> list[int]:
    """Move indices of the first ``steps`` BECA steps, chaining runs from vertex 1."""
    table = CompiledTable() if table is None else table
    loop = make_beca_loop(table)
    n = sampler.n
    q = sampler.fast_query() if query is None else query
    stats = RunStats(trace=[])
    log = array("q")
    ell, nxt = [1, 2, 3, 4], 5
    while len(stats.trace) < steps:
        status, nxt = loop(ell, nxt, n, q, log, stats)
        if status != OK or nxt + 1 > n:
            break
        ell.extend((nxt, nxt + 1))
        nxt += 2
        del log[:]
    if len(stats.trace) < steps:
        raise ValueError(f"polygon too small: only {len(stats.trace)} BECA steps available")
    return stats.trace[:steps]


def bta(
    n: int,
    sampler: EdgeSampler,
    table: CompiledTable | MoveTable | None = None,
    params: GtaParams = GtaParams(),
) -> TriangulationResult:
    """GTA's root/completion/fan skeleton with BECA as the clipping engine."""
    if not isinstance(table, CompiledTable):
        table = CompiledTable(table)
    return run_skeleton(n, sampler, params, make_beca_loop(table), 4, 32)
