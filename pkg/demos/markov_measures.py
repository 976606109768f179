"""
Markov measures on the subshift: two transition matrices with the same
support, their stationary vectors and entropies, how they differ on short
cylinders, and the decay of the probability of avoiding a tight word.

    python demos/markov_measures.py
"""

import numpy as np

from ttdyn import MarkovMeasure, avoidance_probability, cylinder_mass, shift_entropy
from ttdyn.markov import random_rows, stationary_residual, uniform_rows
from ttdyn.seeds import orbit_graph
from ttdyn.typegraph import find_tight_words, largest_component


def main():
    comp = largest_component(orbit_graph((0, 5)))
    A = comp.adjacency
    measures = {"uniform": MarkovMeasure.from_matrix(uniform_rows(A), A),
                "random": MarkovMeasure.from_matrix(random_rows(A, np.random.default_rng(5)), A)}
    for name, mu in measures.items():
        print(f"{name:>8}: entropy {shift_entropy(mu):.6f}, "
              f"stationary residual {stationary_residual(mu.P, mu.p):.1e}")

    e = comp.edges[0]
    for name, mu in measures.items():
        print(f"{name:>8}: mass of cylinder {e.source},{e.target} = "
              f"{cylinder_mass(mu, [e.source, e.target]).mass:.6g}")

    w = min(find_tight_words(comp, 40), key=len)
    q = avoidance_probability(measures["uniform"], w.nodes, 20 * len(w))
    print(f"\ntight word of {len(w)} letters; avoidance decays at rate {q.rate:.6f} per letter")
    for m in range(len(w), len(q.probabilities) + 1, 4 * len(w)):
        print(f"  m = {m:4d}: P(avoid) = {q.probabilities[m - 1]:.6f}")


if __name__ == "__main__":
    main()
