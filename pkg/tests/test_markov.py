import itertools
import math
import random

import numpy as np
import pytest

from ttdyn import (MarkovMeasure, avoidance_probability, cylinder_mass, lebesgue_transitions_mc,
                   shift_entropy, stationary)
from ttdyn.markov import (ReducibleChain, SupportMismatch, check_stochastic, random_rows,
                          sample_cone, stationary_residual, uniform_rows)
from ttdyn.typegraph import find_tight_words, largest_component

from oracles import brute_avoidance

GOLDEN = [[0.5, 0.5], [1.0, 0.0]]
THREE = [[0.2, 0.5, 0.3], [0.6, 0.0, 0.4], [0.0, 0.7, 0.3]]
FOUR = [[0.1, 0.9, 0.0, 0.0], [0.0, 0.2, 0.5, 0.3], [0.4, 0.0, 0.0, 0.6], [0.5, 0.25, 0.25, 0.0]]


def paths(P, length):
    """All admissible words of ``length`` letters."""
    n = len(P)
    for w in itertools.product(range(n), repeat=length):
        if all(P[a][b] > 0 for a, b in zip(w, w[1:])):
            yield w


# -- stationary ------------------------------------------------------------

def test_golden_mean_stationary():
    p = stationary(GOLDEN)
    assert np.allclose(p, [2 / 3, 1 / 3], atol=1e-14)


def test_trivial_and_permutation():
    assert stationary([[1.0]]).tolist() == [1.0]
    p = stationary([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert np.allclose(p, 1 / 3, atol=1e-15)


@pytest.mark.parametrize("P", [GOLDEN, THREE, FOUR])
def test_stationary_residual(P):
    p = stationary(P)
    assert stationary_residual(P, p) <= 1e-12
    assert abs(p.sum() - 1) <= 1e-12 and (p > 0).all()


def test_stationary_on_graph(graph05):
    comp = largest_component(graph05)
    for P in (uniform_rows(comp.adjacency), random_rows(comp.adjacency, np.random.default_rng(1))):
        mu = MarkovMeasure.from_matrix(P, comp.adjacency)
        assert stationary_residual(mu.P, mu.p) <= 1e-12
        assert (mu.p > 0).all()


def test_reducible_rejected():
    with pytest.raises(ReducibleChain):
        stationary([[1.0, 0.0], [0.5, 0.5]])


def test_stochastic_checks():
    with pytest.raises(ValueError):
        check_stochastic([[0.5, 0.4], [1.0, 0.0]])
    with pytest.raises(ValueError):
        check_stochastic([[1.5, -0.5], [1.0, 0.0]])
    with pytest.raises(SupportMismatch) as err:
        check_stochastic(GOLDEN, [[1, 1], [1, 1]])
    assert err.value.entries == [(1, 1)]


# -- cylinders -------------------------------------------------------------

def test_cylinder_single_letters():
    mu = MarkovMeasure.from_matrix(THREE)
    for i in range(3):
        assert cylinder_mass(mu, [i]).mass == pytest.approx(mu.p[i], abs=0)


def test_cylinder_inadmissible():
    mu = MarkovMeasure.from_matrix(GOLDEN)
    c = cylinder_mass(mu, [1, 1])
    assert c.mass == 0 and not c.admissible


@pytest.mark.parametrize("P", [GOLDEN, THREE, FOUR])
def test_kolmogorov_consistency(P):
    mu = MarkovMeasure.from_matrix(P)
    n = len(P)
    assert sum(cylinder_mass(mu, w).mass for w in paths(P, 2)) == pytest.approx(1, abs=1e-14)
    for length in range(1, 6):
        for w in paths(P, length):
            m = cylinder_mass(mu, w).mass
            right = sum(cylinder_mass(mu, w + (j,)).mass for j in range(n))
            left = sum(cylinder_mass(mu, (i,) + w).mass for i in range(n))
            assert right == pytest.approx(m, rel=1e-12, abs=1e-15)
            assert left == pytest.approx(m, rel=1e-12, abs=1e-15)


def test_cylinder_brute_force_three_state():
    # brute force: stationary start times transition products
    mu = MarkovMeasure.from_matrix(THREE)
    for w in paths(THREE, 4):
        expect = mu.p[w[0]] * np.prod([THREE[a][b] for a, b in zip(w, w[1:])])
        assert cylinder_mass(mu, w).mass == pytest.approx(expect, rel=1e-14)


# -- entropy ---------------------------------------------------------------

def test_entropy_fixtures():
    assert shift_entropy(MarkovMeasure.from_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])) == 0
    assert shift_entropy(MarkovMeasure.from_matrix([[0.5, 0.5], [0.5, 0.5]])) == pytest.approx(math.log(2))
    assert shift_entropy(MarkovMeasure.from_matrix(GOLDEN)) == pytest.approx(2 / 3 * math.log(2), rel=1e-14)


# -- avoidance -------------------------------------------------------------

@pytest.mark.parametrize("P,word", [(GOLDEN, (0, 0)), (GOLDEN, (0, 1, 0)), (THREE, (0, 1)),
                                    (THREE, (2, 2, 1)), (FOUR, (1, 2, 0)), (FOUR, (3, 0))])
def test_avoidance_matches_enumeration(P, word):
    mu = MarkovMeasure.from_matrix(P)
    q = avoidance_probability(mu, word, 10)
    for m in range(len(word), 11):
        assert q.probabilities[m - 1] == pytest.approx(brute_avoidance(P, mu.p, word, m), rel=1e-12, abs=1e-15)


def test_avoidance_rate_and_monotone():
    mu = MarkovMeasure.from_matrix(GOLDEN)
    q = avoidance_probability(mu, (0, 0), 30)
    assert q.rate == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert all(a >= b for a, b in zip(q.probabilities, q.probabilities[1:]))
    assert all(pr <= q.constant * q.rate ** k * (1 + 1e-12) for k, pr in enumerate(q.probabilities, 1))


def test_avoidance_inadmissible_word():
    mu = MarkovMeasure.from_matrix(GOLDEN)
    q = avoidance_probability(mu, (1, 1), 12)
    assert q.probability == 1.0 and set(q.probabilities) == {1.0}


@pytest.mark.parametrize("P", [GOLDEN, THREE, FOUR])
def test_rate_below_one_for_mixing_chains(P):
    mu = MarkovMeasure.from_matrix(P)
    for w in paths(P, 3):
        assert avoidance_probability(mu, w, 6).rate < 1


def test_avoidance_tight_word_on_graph(graph05):
    comp = largest_component(graph05)
    mu = MarkovMeasure.from_matrix(uniform_rows(comp.adjacency), comp.adjacency)
    w = min(find_tight_words(comp, 40), key=len)
    q = avoidance_probability(mu, w.nodes, 4 * len(w))
    assert q.rate < 1
    assert q.probability < 1


def test_avoidance_csv():
    q = avoidance_probability(MarkovMeasure.from_matrix(GOLDEN), (0, 0), 5)
    lines = q.to_csv().splitlines()
    assert lines[0] == "m,probability,bound" and len(lines) == 6


# -- Monte Carlo -----------------------------------------------------------

def branching_node(graph):
    return next(i for i in range(graph.size) if len(graph.out_edges(i)) > 1)


def test_mc_partition_and_determinism(graph05):
    node = branching_node(graph05)
    a = lebesgue_transitions_mc(graph05, node, 600, rng_seed=3, chunk=200)
    b = lebesgue_transitions_mc(graph05, node, 600, rng_seed=3, chunk=200)
    assert a == b
    assert sum(a.counts) == 600
    assert sum(a.frequencies) == pytest.approx(1, abs=1e-15)
    # choices leading outside the materialized graph have no target
    edges = {e.choice: e.target for e in graph05.out_edges(node)}
    assert set(edges) <= set(a.labels)
    assert all(t == edges.get(l) for l, t in zip(a.labels, a.targets))


def test_mc_standard_error_scaling(graph05):
    # quadrupling the samples halves the error; the reported error matches
    # the spread of independent runs
    node = branching_node(graph05)
    small = 150
    runs = [lebesgue_transitions_mc(graph05, node, small, rng_seed=s) for s in range(12)]
    big = lebesgue_transitions_mc(graph05, node, 4 * small, rng_seed=99)
    k = max(range(len(big.labels)), key=lambda i: big.standard_errors[i])
    f = np.array([r.frequencies[k] for r in runs])
    se = math.sqrt(f.mean() * (1 - f.mean()) / small)
    assert big.standard_errors[k] == pytest.approx(se / 2, rel=0.25)
    # sample std of 12 runs is within 60% of the true error with high probability
    assert float(f.std(ddof=1)) == pytest.approx(se, rel=0.6)


def test_mc_no_outgoing_edges(seed05):
    from ttdyn import build_type_graph
    g = build_type_graph([seed05], 3)
    node = next(i for i in range(g.size) if not g.out_edges(i))
    with pytest.raises(ValueError):
        lebesgue_transitions_mc(g, node, 10, rng_seed=0)


def test_samplers_agree_in_mean(graph05):
    # the exact simplex sampler and the rejection sampler target the same law
    from ttdyn.markov import _cone_chart
    t = next(t for t in graph05.representatives if _cone_chart(t)[3])
    rng = random.Random(4)
    n = 1500
    a = np.array([[float(x) for x in sample_cone(t, rng)] for _ in range(n)])
    b = np.array([[float(x) for x in sample_cone(t, rng, method="reject")] for _ in range(n)])
    err = np.sqrt(a.var(axis=0) / n + b.var(axis=0) / n)
    assert (np.abs(a.mean(axis=0) - b.mean(axis=0)) <= 4.5 * err + 1e-12).all()
    assert np.allclose(a.sum(axis=1), 1) and (a >= 0).all() and (b >= 0).all()


# -- uncountable family surrogate ------------------------------------------

def test_distinct_matrices_give_distinct_measures(graph05):
    comp = largest_component(graph05)
    A = comp.adjacency
    P1 = uniform_rows(A)
    P2 = random_rows(A, np.random.default_rng(5))
    assert not np.allclose(P1, P2)
    m1 = MarkovMeasure.from_matrix(P1, A)
    m2 = MarkovMeasure.from_matrix(P2, A)
    words = [(i,) for i in range(comp.size)] + [(e.source, e.target) for e in comp.edges]
    gap = max(abs(cylinder_mass(m1, w).mass - cylinder_mass(m2, w).mass) for w in words)
    assert gap > 1e-6


def test_measure_json_round_trip():
    mu = MarkovMeasure.from_matrix(THREE)
    back = MarkovMeasure.from_dict(mu.to_dict())
    assert (back.P == mu.P).all() and (back.p == mu.p).all()
