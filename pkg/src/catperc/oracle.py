"""Exact triangulation decision via the Catalan closure dynamics.

An interval ``(i, k)`` is *infected* when ``{i, k}`` is available and some
``i < j < k`` has both ``(i, j)`` and ``(j, k)`` infected; the path edges
``(i, i+1)`` start infected. The polygon can be triangulated iff ``(1, n)``
ends up infected. The least fixed point is filled in by increasing interval
length, so each entry is decided once.

The table is stored as two bit-packed matrices: ``rows[i]`` holds the infected
right endpoints of ``i`` and ``cols[k]`` the infected left endpoints of ``k``,
so the existence of a splitting vertex is a word-wise AND.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from numba import njit

from .edges import Avail, adjacency_matrix, is_boundary

Rule = Literal["catalan", "oriented"]
ENUMERATION_LIMIT = 12


@njit(cache=True)
def _closure_bits(adj, oriented):
    n = adj.shape[0]
    words = (n + 63) // 64
    rows = np.zeros((n, words), dtype=np.uint64)
    cols = np.zeros((n, words), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(n - 1):
        k = i + 1
        rows[i, k >> 6] |= one << np.uint64(k & 63)
        cols[k, i >> 6] |= one << np.uint64(i & 63)
    for length in range(2, n):
        for i in range(n - length):
            k = i + length
            if not adj[i, k]:
                continue
            ok = False
            if oriented:
                # split vertex must be i+1 or k-1
                a = (rows[i + 1, k >> 6] >> np.uint64(k & 63)) & one
                b = (rows[i, (k - 1) >> 6] >> np.uint64((k - 1) & 63)) & one
                ok = a != 0 or b != 0
            else:
                for w in range((i + 1) >> 6, ((k - 1) >> 6) + 1):
                    if rows[i, w] & cols[k, w]:
                        ok = True
                        break
            if ok:
                rows[i, k >> 6] |= one << np.uint64(k & 63)
                cols[k, i >> 6] |= one << np.uint64(i & 63)
    return rows, cols


def _lowest_common_bit(a: np.ndarray, b: np.ndarray, lo: int, hi: int) -> int:
    """Smallest j in [lo, hi] set in both bit rows, or -1."""
    for w in range(lo >> 6, (hi >> 6) + 1):
        x = int(a[w]) & int(b[w])
        while x:
            bit = (x & -x).bit_length() - 1
            j = (w << 6) + bit
            if lo <= j <= hi:
                return j
            x &= x - 1
    return -1


@dataclass(frozen=True)
class ClosureTable:
    """Least fixed point of the closure rule; 0-based bit storage, 1-based API."""

    n: int
    rule: str
    rows: np.ndarray
    cols: np.ndarray

    def infected(self, i: int, k: int) -> bool:
        if not 1 <= i < k <= self.n:
            raise ValueError(f"need 1 <= i < k <= {self.n}, got ({i}, {k})")
        a, b = i - 1, k - 1
        return bool((int(self.rows[a, b >> 6]) >> (b & 63)) & 1)

    def split(self, i: int, k: int) -> int | None:
        """A vertex ``j`` with ``(i, j)`` and ``(j, k)`` both infected."""
        a, b = i - 1, k - 1
        j = _lowest_common_bit(self.rows[a], self.cols[b], a + 1, b - 1)
        return None if j < 0 else j + 1


def closure(n: int, avail: Avail, rule: Rule = "catalan", *, adjacency=None) -> ClosureTable:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if rule not in ("catalan", "oriented"):
        raise ValueError(f"unknown rule {rule!r}")
    adj = adjacency_matrix(n, avail) if adjacency is None else adjacency
    rows, cols = _closure_bits(np.ascontiguousarray(adj, dtype=np.bool_), rule == "oriented")
    return ClosureTable(n, rule, rows, cols)


def _closed_adjacency(n: int, avail: Avail, adjacency=None) -> np.ndarray:
    adj = adjacency_matrix(n, avail) if adjacency is None else adjacency.copy()
    adj[0, n - 1] = adj[n - 1, 0] = True
    return adj


def can_triangulate(n: int, avail: Avail, *, rule: Rule = "catalan", adjacency=None) -> bool:
    """True iff the n-gon has a triangulation whose diagonals are all available."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    table = closure(n, avail, rule, adjacency=_closed_adjacency(n, avail, adjacency))
    return table.infected(1, n)


@dataclass(frozen=True)
class Triangulation:
    """Canonical form: each triple sorted, rows in lexicographic order."""

    n: int
    triangles: np.ndarray

    @classmethod
    def from_triples(cls, n: int, triples) -> "Triangulation":
        arr = np.asarray(list(triples) if not isinstance(triples, np.ndarray) else triples,
                         dtype=np.int64).reshape(-1, 3)
        arr = np.sort(arr, axis=1)
        if len(arr):
            arr = arr[np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))]
        return cls(n, arr)

    def as_tuples(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(tuple(int(v) for v in row) for row in self.triangles)

    def diagonals(self) -> set[tuple[int, int]]:
        out = set()
        for a, b, c in self.as_tuples():
            for u, v in ((a, b), (b, c), (a, c)):
                if not is_boundary(self.n, u, v):
                    out.add((u, v))
        return out

    def __len__(self) -> int:
        return len(self.triangles)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Triangulation):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.triangles, other.triangles)

    def __hash__(self) -> int:
        return hash((self.n, self.as_tuples()))


def witness(n: int, avail: Avail, *, adjacency=None) -> Triangulation | None:
    """Backtrack through the closure table to an explicit triangulation."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    table = closure(n, avail, "catalan", adjacency=_closed_adjacency(n, avail, adjacency))
    if not table.infected(1, n):
        return None
    triples = []
    stack = [(1, n)]
    while stack:
        i, k = stack.pop()
        if k - i < 2:
            continue
        j = table.split(i, k)
        triples.append((i, j, k))
        stack.append((i, j))
        stack.append((j, k))
    return Triangulation.from_triples(n, triples)


def enumerate_triangulations(n: int, avail: Avail) -> list[Triangulation]:
    """Every triangulation using only available diagonals (small n only).

    Each triangulation has exactly one triangle on the side ``{1, n}``; recurse
    on its apex.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"n={n} exceeds enumeration limit {ENUMERATION_LIMIT}")

    def ok(i, j):
        return j - i == 1 or (i == 1 and j == n) or bool(avail(i, j))

    @lru_cache(maxsize=None)
    def fill(i, k):
        if k - i == 1:
            return ((),)
        out = []
        for j in range(i + 1, k):
            if ok(i, j) and ok(j, k):
                for left in fill(i, j):
                    for right in fill(j, k):
                        out.append(left + right + ((i, j, k),))
        return tuple(out)

    found = {Triangulation.from_triples(n, tris) for tris in fill(1, n)}
    return sorted(found, key=lambda t: t.as_tuples())


def _noncrossing(chords: np.ndarray) -> bool:
    """Chords (i<j) pairwise non-crossing; shared endpoints are allowed."""
    if len(chords) < 2:
        return True
    order = np.lexsort((-chords[:, 1], chords[:, 0]))
    stack: list[int] = []
    for i, j in chords[order].tolist():
        while stack and stack[-1] <= i:
            stack.pop()
        if stack and j > stack[-1]:
            return False
        stack.append(j)
    return True


def validate_triangulation(n: int, t: Triangulation, avail: Avail | None = None) -> bool:
    tri = np.asarray(t.triangles, dtype=np.int64).reshape(-1, 3)
    if n < 3 or t.n != n or len(tri) != n - 2:
        return False
    if tri.min() < 1 or tri.max() > n:
        return False
    tri = np.sort(tri, axis=1)
    if np.any(tri[:, 0] == tri[:, 1]) or np.any(tri[:, 1] == tri[:, 2]):
        return False
    edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [0, 2]]])
    uniq, counts = np.unique(edges[:, 0] * (n + 1) + edges[:, 1], return_counts=True)
    u, v = uniq // (n + 1), uniq % (n + 1)
    boundary = (v - u == 1) | ((u == 1) & (v == n))
    if boundary.sum() != n or np.any(counts[boundary] != 1) or np.any(counts[~boundary] != 2):
        return False
    chords = np.stack([u[~boundary], v[~boundary]], axis=1)
    if not _noncrossing(chords):
        return False
    if avail is not None and len(chords):
        query_array = getattr(avail, "query_array", None)
        if query_array is not None:
            present = query_array(chords[:, 0], chords[:, 1])
        else:
            present = [avail(int(a), int(b)) for a, b in chords]
        if not np.all(present):
            return False
    return True
