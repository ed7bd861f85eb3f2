"""Random internal edges of the convex n-gon.

Vertices are labelled ``1..n`` counter-clockwise. Boundary sides ``{i, i+1}``
and ``{n, 1}`` are always present; every other pair (a diagonal) is present
independently with probability ``p``.

Presence of a diagonal is a pure function of ``(seed, p, {i, j})``::

    u, v = min(i, j), max(i, j)
    x = mix64(mix64(seed + u*K1) + v*K2)        # all arithmetic mod 2**64
    present  <=>  x < floor(p * 2**64)

where ``mix64`` is the SplitMix64 finalizer. Algorithms can therefore query
edges in any order, any number of times, and always see the same graph. The
probability is quantized to ``floor(p * 2**64) / 2**64``. Because the test is a
threshold on a fixed hash, raising ``p`` with the seed held fixed only ever
adds edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
K1 = 0x9E3779B97F4A7C15
K2 = 0xC2B2AE3D27D4EB4F
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

MATERIALIZE_LIMIT = 10_000

# Any callable (i, j) -> bool over vertex labels.
Avail = Callable[[int, int], bool]


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit unsigned integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def pair_hash(seed: int, i: int, j: int) -> int:
    u, v = (i, j) if i < j else (j, i)
    return mix64((mix64((seed + u * K1) & MASK64) + v * K2) & MASK64)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_C1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_C2)
    return z ^ (z >> np.uint64(31))


def pair_hash_array(seed: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Vectorized :func:`pair_hash` (uint64 arithmetic wraps mod 2**64)."""
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    u = np.minimum(i, j)
    v = np.maximum(i, j)
    with np.errstate(over="ignore"):
        a = _mix64_np(np.uint64(seed & MASK64) + u * np.uint64(K1))
        return _mix64_np(a + v * np.uint64(K2))


@njit(cache=True)
def _adjacency_kernel(n, seed, threshold, full):
    out = np.zeros((n, n), dtype=np.bool_)
    c1 = np.uint64(_C1)
    c2 = np.uint64(_C2)
    k1 = np.uint64(K1)
    k2 = np.uint64(K2)
    s30 = np.uint64(30)
    s27 = np.uint64(27)
    s31 = np.uint64(31)
    for a in range(n):
        z = seed + np.uint64(a + 1) * k1
        z = (z ^ (z >> s30)) * c1
        z = (z ^ (z >> s27)) * c2
        base = z ^ (z >> s31)
        for b in range(a + 1, n):
            if b == a + 1 or (a == 0 and b == n - 1) or full:
                present = True
            else:
                z = base + np.uint64(b + 1) * k2
                z = (z ^ (z >> s30)) * c1
                z = (z ^ (z >> s27)) * c2
                present = (z ^ (z >> s31)) < threshold
            out[a, b] = present
            out[b, a] = present
    return out


def probability_threshold(p: float) -> int:
    """``floor(p * 2**64)`` computed exactly from the binary value of ``p``."""
    return int(Fraction(p) * (1 << 64))


def is_boundary(n: int, i: int, j: int) -> bool:
    d = abs(i - j)
    return d == 1 or d == n - 1


def _check_vertices(n: int, i: int, j: int) -> None:
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"vertex out of range 1..{n}: ({i}, {j})")
    if i == j:
        raise ValueError(f"query needs two distinct vertices, got ({i}, {j})")


@dataclass(frozen=True)
class EdgeSampler:
    """Deterministic lazy realization of the random edge set E(n, p).

    Immutable and callable as ``sampler(i, j)``; safe to share between workers.
    """

    n: int
    p: float
    seed: int
    threshold: int = field(init=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)
        object.__setattr__(self, "threshold", probability_threshold(self.p))

    def query(self, i: int, j: int) -> bool:
        _check_vertices(self.n, i, j)
        if is_boundary(self.n, i, j):
            return True
        return pair_hash(self.seed, i, j) < self.threshold

    __call__ = query

    def fast_query(self) -> Avail:
        """Unchecked query closure for hot loops; same answers as :meth:`query`."""
        n, seed, thr = self.n, self.seed, self.threshold
        n1 = n - 1

        def q(i, j):
            if i > j:
                i, j = j, i
            d = j - i
            if d == 1 or d == n1:
                return True
            z = (seed + i * K1) & MASK64
            z = ((z ^ (z >> 30)) * _C1) & MASK64
            z = ((z ^ (z >> 27)) * _C2) & MASK64
            z = ((z ^ (z >> 31)) + j * K2) & MASK64
            z = ((z ^ (z >> 30)) * _C1) & MASK64
            z = ((z ^ (z >> 27)) * _C2) & MASK64
            return (z ^ (z >> 31)) < thr

        return q

    def query_array(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Presence for arrays of label pairs (boundary pairs included)."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if i.size and (
            i.min() < 1 or j.min() < 1 or i.max() > self.n or j.max() > self.n
        ):
            raise ValueError(f"vertex out of range 1..{self.n}")
        if np.any(i == j):
            raise ValueError("query needs two distinct vertices")
        d = np.abs(i - j)
        boundary = (d == 1) | (d == self.n - 1)
        if self.threshold >= 1 << 64:
            return np.ones(i.shape, dtype=bool)
        hit = pair_hash_array(self.seed, i, j) < np.uint64(self.threshold)
        return boundary | hit

    def adjacency(self) -> np.ndarray:
        """Dense symmetric boolean matrix indexed ``[i-1, j-1]``; diagonal False."""
        full = self.threshold >= 1 << 64
        thr = np.uint64(0 if full else self.threshold)
        return _adjacency_kernel(self.n, np.uint64(self.seed), thr, full)


@dataclass(frozen=True)
class ExplicitEdgeSet:
    """A finite set of diagonals; boundary sides are implicitly present."""

    n: int
    diagonals: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3, got {self.n}")
        canon = set()
        for i, j in self.diagonals:
            i, j = int(i), int(j)
            _check_vertices(self.n, i, j)
            if is_boundary(self.n, i, j):
                raise ValueError(f"({i}, {j}) is a boundary side, not a diagonal")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "diagonals", frozenset(canon))

    def query(self, i: int, j: int) -> bool:
        _check_vertices(self.n, i, j)
        if is_boundary(self.n, i, j):
            return True
        return (min(i, j), max(i, j)) in self.diagonals

    __call__ = query

    def adjacency(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=bool)
        idx = np.arange(n - 1)
        out[idx, idx + 1] = out[idx + 1, idx] = True
        out[0, n - 1] = out[n - 1, 0] = True
        for i, j in self.diagonals:
            out[i - 1, j - 1] = out[j - 1, i - 1] = True
        return out


def all_diagonals(n: int) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i in range(1, n + 1)
        for j in range(i + 2, n + 1)
        if not (i == 1 and j == n)
    ]


def materialize(sampler: EdgeSampler) -> ExplicitEdgeSet:
    if sampler.n > MATERIALIZE_LIMIT:
        raise ValueError(
            f"n={sampler.n} too large to enumerate diagonals (limit {MATERIALIZE_LIMIT})"
        )
    adj = np.triu(sampler.adjacency(), k=2)
    adj[0, sampler.n - 1] = False
    iu, ju = np.nonzero(adj)
    return ExplicitEdgeSet(sampler.n, frozenset(zip((iu + 1).tolist(), (ju + 1).tolist())))


def adjacency_matrix(n: int, avail: Avail) -> np.ndarray:
    """Boolean adjacency for any availability source (fast path for known types)."""
    if isinstance(avail, (EdgeSampler, ExplicitEdgeSet)):
        if avail.n != n:
            raise ValueError(f"edge source has n={avail.n}, expected {n}")
        return avail.adjacency()
    out = np.zeros((n, n), dtype=bool)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if avail(i, j):
                out[i - 1, j - 1] = out[j - 1, i - 1] = True
    return out


def read_edge_file(path: str | Path) -> ExplicitEdgeSet:
    """Parse ``n`` on the first line, then one ``i j`` diagonal per line.

    Blank lines and ``#`` comments are ignored.
    """
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ValueError(f"{path}: empty edge file")
    n = int(lines[0])
    pairs = []
    for k, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: line {k}: expected 'i j', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return ExplicitEdgeSet(n, frozenset(pairs))


def write_edge_file(edges: ExplicitEdgeSet, path: str | Path) -> None:
    body = [str(edges.n)] + [f"{i} {j}" for i, j in sorted(edges.diagonals)]
    Path(path).write_text("\n".join(body) + "\n")


def edge_set(n: int, pairs: Iterable[tuple[int, int]]) -> ExplicitEdgeSet:
    return ExplicitEdgeSet(n, frozenset(pairs))
