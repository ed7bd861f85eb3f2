import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catperc.edges import EdgeSampler, ExplicitEdgeSet, all_diagonals, materialize
from catperc.oracle import (
    Triangulation,
    can_triangulate,
    closure,
    enumerate_triangulations,
    validate_triangulation,
    witness,
)


def crosses(a, b):
    (i, j), (k, l) = sorted(a), sorted(b)
    return i < k < j < l or k < i < l < j


def brute_triangulations(n, diags):
    """Triangulations as maximal non-crossing sets of n-3 diagonals."""
    out = []
    for combo in itertools.combinations(sorted(diags), n - 3):
        if all(not crosses(a, b) for a, b in itertools.combinations(combo, 2)):
            out.append(frozenset(combo))
    return out


def subsets(n):
    d = all_diagonals(n)
    for mask in range(1 << len(d)):
        yield ExplicitEdgeSet(n, frozenset(x for k, x in enumerate(d) if mask >> k & 1))


def test_small_cases():
    assert can_triangulate(3, ExplicitEdgeSet(3))
    assert not can_triangulate(4, ExplicitEdgeSet(4))
    assert can_triangulate(4, ExplicitEdgeSet(4, frozenset({(1, 3)})))
    t = closure(3, ExplicitEdgeSet(3))
    assert t.infected(1, 2) and t.infected(2, 3)


def test_witness_forced():
    w = witness(4, ExplicitEdgeSet(4, frozenset({(2, 4)})))
    assert w.as_tuples() == ((1, 2, 4), (2, 3, 4))
    assert witness(3, ExplicitEdgeSet(3)).as_tuples() == ((1, 2, 3),)
    assert witness(5, ExplicitEdgeSet(5)) is None


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_enumerator_matches_noncrossing_brute_force(n):
    for e in itertools.islice(subsets(n), 0, None, 1 if n < 7 else 37):
        got = {frozenset(t.diagonals()) for t in enumerate_triangulations(n, e)}
        assert got == {frozenset(x) for x in brute_triangulations(n, e.diagonals)}


def test_hexagon_counts_and_restriction():
    tri = orient = 0
    for e in subsets(6):
        cat = closure(6, e)
        ori = closure(6, e, "oriented")
        assert np.all(ori.rows & ~cat.rows == 0)
        c = can_triangulate(6, e)
        assert c == bool(enumerate_triangulations(6, e))
        tri += c
        orient += can_triangulate(6, e, rule="oriented")
    assert orient <= tri
    assert tri == sum(1 for e in subsets(6) if enumerate_triangulations(6, e))


@pytest.mark.parametrize("n,count", [(3, 1), (5, 5), (6, 14), (7, 42), (8, 132), (9, 429)])
def test_catalan_counts(n, count):
    assert len(enumerate_triangulations(n, EdgeSampler(n, 1.0, 0))) == count


def test_enumeration_guard():
    with pytest.raises(ValueError):
        enumerate_triangulations(13, EdgeSampler(13, 1.0, 0))


@given(st.integers(3, 40), st.floats(0.2, 1.0), st.integers(0, 2**40))
def test_witness_validates(n, p, seed):
    s = EdgeSampler(n, p, seed)
    w = witness(n, s)
    assert (w is not None) == can_triangulate(n, s)
    if w is not None:
        assert validate_triangulation(n, w, s)
        assert validate_triangulation(n, w, materialize(s))


@given(st.integers(5, 30), st.floats(0.1, 0.9), st.integers(0, 2**40), st.data())
def test_adding_a_diagonal_keeps_triangulability(n, p, seed, data):
    e = materialize(EdgeSampler(n, p, seed))
    extra = data.draw(st.sampled_from(all_diagonals(n)))
    bigger = ExplicitEdgeSet(n, e.diagonals | {extra})
    assert can_triangulate(n, e) <= can_triangulate(n, bigger)


def test_oriented_subset_of_catalan_random():
    for seed in range(30):
        s = EdgeSampler(60, 0.45, seed)
        cat, ori = closure(60, s), closure(60, s, "oriented")
        assert np.all(ori.rows & ~cat.rows == 0)


def test_validator_rejects():
    s = EdgeSampler(7, 1.0, 0)
    t = witness(7, s)
    assert validate_triangulation(7, t, s)
    assert not validate_triangulation(7, Triangulation.from_triples(7, t.as_tuples()[1:]))
    # both diagonals of a quadrilateral cannot co-occur
    bad = Triangulation.from_triples(4, [(1, 2, 3), (2, 3, 4)])
    assert not validate_triangulation(4, bad)
    # crossing chords {1,4} and {3,6} in a hexagon with the right counts
    cross = Triangulation.from_triples(6, [(1, 2, 4), (2, 3, 4), (3, 4, 6), (1, 4, 6)])
    assert not validate_triangulation(6, cross)
    assert not validate_triangulation(7, t, ExplicitEdgeSet(7))
    assert not validate_triangulation(8, t)


def test_triangulation_canonical_equality():
    a = Triangulation.from_triples(4, [(3, 1, 2), (4, 3, 1)])
    b = Triangulation.from_triples(4, [(1, 3, 4), (1, 2, 3)])
    assert a == b and hash(a) == hash(b)
    assert a.diagonals() == {(1, 3)}
