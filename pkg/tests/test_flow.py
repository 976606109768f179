import math
from collections import Counter

import numpy as np
import pytest

from ttdyn import (MarkovMeasure, PeriodicLoop, Word, build_type_graph, count_report, dilatation,
                   enumerate_loops, flow_entropy, loop_matrix, shift_entropy)
from ttdyn.flow import (LoopNotClosed, complete_range, counted_periods, loop_dilatation, loop_roof,
                        restricted_loop_matrix, roof_along, roof_estimate)

from oracles import det, edge_counts, necklaces

MAX_LEN = 80


@pytest.fixture(scope="module")
def census(graph05):
    return enumerate_loops(graph05, MAX_LEN)


@pytest.fixture(scope="module")
def hyperbolic(graph05, census):
    """Primitive loops with dilatation above one."""
    out = []
    for l in census.loops:
        d = loop_dilatation(graph05, l)
        if l.primitive and d.period > 1e-9:
            out.append((l, d))
    return out


# -- dilatation ------------------------------------------------------------

def test_golden_ratio():
    d = dilatation([[1, 1], [1, 0]])
    assert d.lam == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-9)
    assert d.period == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-12)
    assert d.primitive and d.peripheral == 1
    assert d.residual <= 1e-10


def test_permutation_has_several_peripheral_eigenvalues():
    d = dilatation([[0, 1], [1, 0]])
    assert d.lam == pytest.approx(1) and d.peripheral == 2 and not d.primitive


def test_non_square_rejected():
    with pytest.raises(ValueError):
        dilatation([[1, 2, 3], [4, 5, 6]])


# -- loop matrices ---------------------------------------------------------

def test_one_letter_word_is_identity(graph05):
    M = loop_matrix(graph05, Word((0,)))
    assert (M == np.eye(len(M), dtype=int)).all()


def test_unclosed_word_raises(graph05):
    e = next(e for e in graph05.edges if e.source != e.target)
    with pytest.raises(LoopNotClosed):
        loop_matrix(graph05, Word((e.source, e.target), (e.choice,)))
    with pytest.raises(LoopNotClosed):
        loop_matrix(graph05, PeriodicLoop((e.source, e.target), (e.choice, e.choice)))


def test_twice_around_is_square(graph05, hyperbolic):
    for l, _ in hyperbolic[:5]:
        M = loop_matrix(graph05, l)
        assert (loop_matrix(graph05, l.power(2)) == M.dot(M)).all()
        assert (loop_matrix(graph05, l.word(2)) == M.dot(M)).all()


def test_loop_matrices_unimodular(graph05, census):
    for l in census.loops[:12]:
        assert det(loop_matrix(graph05, l)) == 1


def test_restricted_matrix_is_integral_on_chart(graph05, hyperbolic):
    for l, d in hyperbolic[:5]:
        R = restricted_loop_matrix(graph05, l)
        assert R.shape == (4, 4)
        assert dilatation(R).lam == pytest.approx(d.lam, rel=1e-12)


def test_powers_and_rotations(graph05, hyperbolic):
    assert len(hyperbolic) >= 20
    for l, d in hyperbolic[:20]:
        assert d.lam > 1
        for k in range(2, 5):
            dk = loop_dilatation(graph05, l.power(k))
            assert dk.period == pytest.approx(k * d.period, rel=1e-12)
        for s in range(0, len(l), max(1, len(l) // 4)):
            ds = loop_dilatation(graph05, l.word(1, start=s))
            assert ds.lam == pytest.approx(d.lam, rel=1e-12)


# -- roof ------------------------------------------------------------------

def test_roof_sum_is_period(graph05, hyperbolic):
    for l, d in hyperbolic[:20]:
        r = loop_roof(graph05, l, 2 * len(l))
        assert all(v.value >= 0 for v in r.values)
        assert abs(r.total - d.period) <= r.radius + 1e-9
        assert r.radius < 1e-6
        assert all(s > 0 for s in r.window_sums(len(l)))


def test_roof_radius_shrinks_with_depth(graph05, hyperbolic):
    l, _ = hyperbolic[0]
    w = l.word(4)
    radii = [roof_estimate(graph05, w, k).radius for k in (len(l), 2 * len(l), 3 * len(l))]
    assert radii[0] >= radii[1] >= radii[2]


def test_roof_depth_bounds(graph05, hyperbolic):
    l, _ = hyperbolic[0]
    with pytest.raises(ValueError):
        roof_along(graph05, l.word(1), 0)
    with pytest.raises(ValueError):
        roof_estimate(graph05, l.word(1), len(l) + 1)


# -- enumeration -----------------------------------------------------------

def test_self_loops_only_at_length_one(graph05):
    c = enumerate_loops(graph05, 1)
    assert {(l.nodes, l.choices) for l in c.loops} == {
        ((e.source,), (e.choice,)) for e in graph05.edges if e.source == e.target}
    assert enumerate_loops(graph05, 0).loops == []


def test_loops_close_and_are_canonical(graph05, census):
    seen = set()
    for l in census.loops:
        loop_matrix(graph05, l)
        assert PeriodicLoop.of(*l.rotated(1)) == l
        assert l not in seen
        seen.add(l)
    assert not census.partial


def test_census_matches_necklace_count():
    # small graphs: loops of each length equal the rotation classes of closed walks
    from ttdyn import seed_track
    for surface, budget in (((0, 5), 8), ((2, 0), 6)):
        g = build_type_graph([seed_track(surface)], budget)
        A = edge_counts(g)
        c = enumerate_loops(g, 8)
        by_len = Counter(len(l) for l in c.loops)
        assert c.imprimitive > 0
        for n in range(1, 9):
            walks = int(np.trace(np.linalg.matrix_power(A, n)))
            assert by_len[n] == necklaces(A, n)
            assert by_len[n] >= walks / n


def test_census_complete_on_orbit_graph(graph05, census):
    A = edge_counts(graph05)
    by_len = Counter(len(l) for l in census.loops)
    assert all(by_len[n] == necklaces(A, n) for n in range(1, MAX_LEN + 1))


def test_loop_budget_flags_partial(graph05):
    c = enumerate_loops(graph05, MAX_LEN, max_loops=5)
    assert c.partial


def test_primitive_flag():
    l = PeriodicLoop.of((1, 2), ("a", "b"))
    assert l.primitive and not l.power(3).primitive
    assert len(l.power(3)) == 6


# -- counting --------------------------------------------------------------

def test_counted_periods_excludes_twists(graph05, census, hyperbolic):
    counted, skipped = counted_periods(graph05, census.loops)
    assert len(counted) == len(hyperbolic)
    assert skipped == len(census.loops) - len(hyperbolic)
    assert all(p > 0 for _, p in counted)


def test_count_report_basics():
    empty = count_report([], [1.0, 2.0], dim=4)
    assert empty.counts == (0, 0) and all(math.isnan(e) for e in empty.estimates)
    assert (empty.target, empty.bound) == (4, 20)
    ps = [0.5, 1.0, 1.0, 2.5, 3.0]
    rep = count_report(ps, [0.4, 1.0, 2.0, 3.0])
    assert rep.counts == (0, 3, 3, 5)
    assert rep.estimates[1] == pytest.approx(math.log(3))
    lines = rep.to_csv().splitlines()
    assert lines[1] == "r,n,estimate" and len(lines) == 6


def test_count_report_monotone_and_additive():
    rng = np.random.default_rng(8)
    a, b = list(rng.uniform(0, 10, 50)), list(rng.uniform(0, 10, 70))
    grid = np.linspace(0.1, 10, 25)
    ra, rb, rab = count_report(a, grid), count_report(b, grid), count_report(a + b, grid)
    assert all(x <= y for x, y in zip(rab.counts, rab.counts[1:]))
    assert all(x + y == z for x, y, z in zip(ra.counts, rb.counts, rab.counts))


def test_complete_range():
    assert all(math.isnan(x) for x in complete_range([], [], 10))
    lo, hi = complete_range([5, 9, 10], [2.0, 7.0, 4.0], 10)
    assert (lo, hi) == (2.0, 4.0)
    assert complete_range([5], [3.0], 10) == (3.0, 3.0)


# -- flow entropy ----------------------------------------------------------

def unit_roof(w):
    return 1.0, 0.0


def test_flow_entropy_unit_roof_is_shift_entropy():
    mu = MarkovMeasure.from_matrix([[0.5, 0.5], [1.0, 0.0]])
    h = flow_entropy(mu, None, 3, roof=unit_roof)
    assert h.value == pytest.approx(shift_entropy(mu), rel=1e-14)
    assert h.error == 0 and h.mean_roof == pytest.approx(1)


def test_flow_entropy_scales_with_roof():
    mu = MarkovMeasure.from_matrix([[0.2, 0.8], [0.6, 0.4]])
    one = flow_entropy(mu, None, 2, roof=unit_roof)
    two = flow_entropy(mu, None, 2, roof=lambda w: (2.0, 0.0))
    assert two.value == pytest.approx(one.value / 2, rel=1e-14)


def test_flow_entropy_single_loop_is_zero():
    mu = MarkovMeasure.from_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert flow_entropy(mu, None, 2, roof=unit_roof).value == 0


def test_flow_entropy_error_propagates():
    mu = MarkovMeasure.from_matrix([[0.5, 0.5], [1.0, 0.0]])
    h = flow_entropy(mu, None, 1, roof=lambda w: (1.0, 0.1))
    assert h.value - h.error <= shift_entropy(mu) / 1.1 + 1e-15
    assert h.value + h.error >= shift_entropy(mu) / 0.9 - 1e-15
    with pytest.raises(ValueError):
        flow_entropy(mu, None, 1, roof=lambda w: (0.0, 0.0))
