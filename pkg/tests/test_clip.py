import math
from functools import lru_cache

import pytest
from hypothesis import given, strategies as st

from catperc.clip import (
    ClipState,
    GtaParams,
    Step,
    buffer_size,
    default_beta,
    geca_run,
    geca_step,
    geca_step_trace,
    gta,
    list_length_walk,
)
from catperc.edges import EdgeSampler, ExplicitEdgeSet
from catperc.oracle import Triangulation, can_triangulate, validate_triangulation
from catperc.ruin import drift


def test_geca_step_examples():
    s = ClipState.start(range(1, 4))
    assert geca_step(s, EdgeSampler(3, 0.0, 0)) is Step.SUCCESS
    assert s.log == [(1, 2, 3)] and s.tau == 3

    s = ClipState.start(range(1, 7))
    assert geca_step(s, ExplicitEdgeSet(6)) is Step.EXTENDED
    assert s.ell == [1, 2, 3, 4]
    assert geca_step(s, ExplicitEdgeSet(6, frozenset({(2, 4)}))) is Step.CLIPPED
    assert s.ell == [1, 2, 4] and s.log == [(2, 3, 4)]


def test_geca_step_failure_and_errors():
    s = ClipState.start(range(1, 5))
    avail = ExplicitEdgeSet(4)
    assert geca_step(s, avail) is Step.EXTENDED
    assert geca_step(s, avail) is Step.FAILURE
    with pytest.raises(ValueError):
        geca_step(ClipState(list(range(1, 5)), [1, 2], 2), avail)


def test_geca_run_examples():
    r = geca_run([1, 2, 3], ExplicitEdgeSet(3))
    assert r.success and r.tau == 3
    assert not geca_run(range(1, 9), ExplicitEdgeSet(8)).success


@given(st.integers(4, 60), st.floats(0.3, 1.0), st.integers(0, 2**40))
def test_geca_run_output_is_a_triangulated_pocket(n, p, seed):
    s = EdgeSampler(n, p, seed)
    r = geca_run(range(1, n + 1), s)
    if not r.success:
        return
    tau = r.tau
    assert r.polygon_out == [1] + list(range(tau, n + 1))
    assert len(r.log) == tau - 2
    # the clipped pocket 1..tau is a polygon whose closing side {1, tau} was queried
    pocket = Triangulation.from_triples(tau, r.log)
    inner = ExplicitEdgeSet(tau, frozenset(
        (a, b) for a, b in pocket.diagonals() if s.query(a, b)))
    assert validate_triangulation(tau, pocket, inner)


def _geca_success_probability(n, p):
    # height h = list length - 2, e = extensions so far; fail on an absent query with
    # no vertex left. Once the list end is n, the query {1, n} is a side and always present.
    q = 1 - p

    @lru_cache(maxsize=None)
    def f(h, e):
        if h == 0 or (h == 1 and e == n - 3):
            return 1.0
        down = p * f(h - 1, e)
        up = q * f(h + 1, e + 1) if e < n - 3 else 0.0
        return down + up

    return f(1, 0)


@pytest.mark.parametrize("n,p", [(30, 0.55), (20, 0.45)])
def test_geca_success_rate_matches_exact_walk(n, p):
    trials = 10_000
    wins = sum(geca_run(range(1, n + 1), EdgeSampler(n, p, s).fast_query()).success
               for s in range(trials))
    exact = _geca_success_probability(n, p)
    assert abs(wins / trials - exact) <= 3 * math.sqrt(exact * (1 - exact) / trials)


def test_list_length_walk():
    assert list_length_walk(0.6).as_dict() == {-1: 0.6, 1: pytest.approx(0.4)}
    assert drift(list_length_walk(0.6)) == pytest.approx(-0.2)
    assert drift(list_length_walk(0.5)) == 0.0
    with pytest.raises(ValueError):
        list_length_walk(1.0)


def test_step_trace_frequencies():
    steps = 200_000
    for p in (0.3, 0.7):
        tr = geca_step_trace(EdgeSampler(10**6, p, 1), steps)
        down = tr.count(-1) / steps
        assert abs(down - p) <= 3 * math.sqrt(p * (1 - p) / steps)


def test_buffer_and_beta():
    assert default_beta(0.0) > 0 and default_beta(1.0) == 1.0
    assert default_beta(0.6) == pytest.approx(1 / (2 * math.log(1 / 0.6)))
    assert buffer_size(10**5, 0.6) == math.ceil(math.log(10**5) / (2 * math.log(1 / 0.6)))
    assert buffer_size(16, 0.01) == 1
    assert buffer_size(16, 0.99) == 4
    with pytest.raises(ValueError):
        GtaParams(beta=0)
    with pytest.raises(ValueError):
        GtaParams(root_limit=1.5)


def test_gta_trivial_cases():
    r = gta(100, EdgeSampler(100, 1.0, 0))
    assert r.success and validate_triangulation(100, r.triangulation, EdgeSampler(100, 1.0, 0))
    r = gta(100, EdgeSampler(100, 0.0, 0))
    assert not r.success and r.reason == "geca-failed" and r.triangulation is None
    with pytest.raises(ValueError):
        gta(15, EdgeSampler(15, 1.0, 0))
    with pytest.raises(ValueError):
        gta(20, EdgeSampler(21, 1.0, 0))


def test_gta_list_cap():
    r = gta(2000, EdgeSampler(2000, 0.45, 3), GtaParams(max_list_length=4))
    assert not r.success and r.reason == "list-cap-exceeded"


@given(st.integers(16, 400), st.floats(0.45, 1.0), st.integers(0, 2**40))
def test_gta_soundness(n, p, seed):
    s = EdgeSampler(n, p, seed)
    r = gta(n, s)
    if r.success:
        assert validate_triangulation(n, r.triangulation, s)
        assert can_triangulate(n, s)
        if r.root is not None:
            b = r.buffer
            assert all(s.query(r.root, w) for w in range(n - b, n + 1) if w != r.root)
    else:
        assert r.reason in {"geca-failed", "no-root-before-limit", "completion-overran-buffer"}


def test_gta_json():
    r = gta(200, EdgeSampler(200, 0.9, 1))
    out = r.to_json(with_triangles=True)
    assert out["success"] and len(out["triangles"]) == 198
    assert set(out) >= {"success", "reason", "steps", "max_list_len"}
