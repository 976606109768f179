r"""
Markov measures on the subshift.

Conventions: ``P[i, j]`` is the probability of moving to ``j`` from ``i``
(rows sum to one), the stationary vector is a row vector with ``p = p P``,
and the mass of the cylinder of a word ``w`` is
``p[w0] * P[w0, w1] * ... * P[w(n-2), w(n-1)]``.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from . import cones
from .moves import compatible_direction
from .typegraph import TypeGraph, choice_label, strongly_connected_components

log = logging.getLogger(__name__)

ROW_TOL = 1e-12


class SupportMismatch(ValueError):
    def __init__(self, entries: list[tuple[int, int]]):
        self.entries = entries
        shown = ", ".join(f"({i},{j})" for i, j in entries[:10])
        more = "" if len(entries) <= 10 else f" and {len(entries) - 10} more"
        super().__init__(f"support of P differs from A at {shown}{more}")


class ReducibleChain(ValueError):
    pass


def support_mismatches(P, A) -> list[tuple[int, int]]:
    """Entries where ``P[i, j] > 0`` and ``A[i, j] > 0`` disagree."""
    P, A = np.asarray(P, dtype=float), np.asarray(A)
    if P.shape != A.shape:
        raise ValueError(f"shape mismatch: {P.shape} vs {A.shape}")
    return [(int(i), int(j)) for i, j in np.argwhere((P > 0) != (A > 0))]


def check_stochastic(P, A=None) -> np.ndarray:
    r"""
    Validate a stochastic matrix: square, nonnegative, rows summing to one
    within ``1e-12`` and, if ``A`` is given, support exactly equal to ``A``.
    Returns ``P`` as a float array.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("P must be square")
    if np.any(P < 0):
        raise ValueError("P has negative entries")
    bad = np.nonzero(np.abs(P.sum(axis=1) - 1) > ROW_TOL)[0]
    if len(bad):
        raise ValueError(f"rows {list(map(int, bad))} do not sum to one")
    if A is not None:
        wrong = support_mismatches(P, A)
        if wrong:
            raise SupportMismatch(wrong)
    return P


def uniform_rows(A) -> np.ndarray:
    """Stochastic matrix spreading each row uniformly over the support of ``A``."""
    A = (np.asarray(A) > 0).astype(float)
    s = A.sum(axis=1, keepdims=True)
    if np.any(s == 0):
        raise ValueError("A has a row without successors")
    return A / s


def random_rows(A, rng: np.random.Generator) -> np.ndarray:
    """Random stochastic matrix with the support of ``A`` (Dirichlet rows)."""
    A = np.asarray(A) > 0
    P = np.zeros(A.shape)
    for i in range(A.shape[0]):
        idx = np.nonzero(A[i])[0]
        if not len(idx):
            raise ValueError("A has a row without successors")
        P[i, idx] = rng.dirichlet(np.ones(len(idx)))
    return P


def stationary(P, max_iter: int = 200_000) -> np.ndarray:
    r"""
    Stationary probability vector of an irreducible stochastic matrix.

    The vector is obtained by a linear solve of ``p (P - I) = 0`` with
    ``sum(p) = 1`` and cross-checked against power iteration on the lazy
    chain ``(I + P) / 2``, which has the same stationary vector and no
    periodicity.  A warning is logged if the two do not agree to ``1e-12``
    in the 1-norm within ``max_iter`` steps.

    EXAMPLES::

        >>> stationary([[0.5, 0.5], [1.0, 0.0]]).round(12).tolist()
        [0.666666666667, 0.333333333333]
    """
    P = check_stochastic(P)
    n = P.shape[0]
    comps = strongly_connected_components(P > 0)
    if len(comps) != 1:
        raise ReducibleChain(f"support has {len(comps)} strongly connected components; restrict first")
    M = np.vstack([(P - np.eye(n)).T, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1
    p = np.linalg.lstsq(M, rhs, rcond=None)[0]
    # one or two polishing steps of iterative refinement
    for _ in range(2):
        r = rhs - M @ p
        p = p + np.linalg.lstsq(M, r, rcond=None)[0]
    p = np.clip(p, 0, None)
    p /= p.sum()
    lazy = 0.5 * (np.eye(n) + P)
    q = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        q = q @ lazy
        if np.abs(q - p).sum() <= 1e-12:
            break
    else:
        log.warning("power iteration did not reach the solved stationary vector within %d steps", max_iter)
    return p


def stationary_residual(P, p) -> float:
    """``||p - p P||_1``."""
    P, p = np.asarray(P, dtype=float), np.asarray(p, dtype=float)
    return float(np.abs(p - p @ P).sum())


@dataclass(frozen=True)
class MarkovMeasure:
    P: np.ndarray
    p: np.ndarray

    @classmethod
    def from_matrix(cls, P, A=None) -> "MarkovMeasure":
        P = check_stochastic(P, A)
        return cls(P, stationary(P))

    @property
    def size(self) -> int:
        return self.P.shape[0]

    def to_dict(self) -> dict:
        return {"P": [[repr(float(x)) for x in row] for row in self.P],
                "p": [repr(float(x)) for x in self.p]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovMeasure":
        return cls(np.array([[float(x) for x in row] for row in d["P"]]),
                   np.array([float(x) for x in d["p"]]))


@dataclass(frozen=True)
class CylinderMass:
    mass: float
    admissible: bool

    def __float__(self) -> float:
        return self.mass


def cylinder_mass(measure: MarkovMeasure, word: Sequence[int]) -> CylinderMass:
    r"""
    Mass of the cylinder of ``word``.  Inadmissible words get mass zero and
    ``admissible=False``.

    EXAMPLES::

        >>> mu = MarkovMeasure.from_matrix([[0.5, 0.5], [1.0, 0.0]])
        >>> round(cylinder_mass(mu, [0, 1, 0]).mass, 12)
        0.333333333333
    """
    if not len(word):
        return CylinderMass(1.0, True)
    m = float(measure.p[word[0]])
    for a, b in zip(word, word[1:]):
        m *= float(measure.P[a, b])
        if m == 0.0 and measure.P[a, b] == 0:
            return CylinderMass(0.0, False)
    return CylinderMass(m, True)


def shift_entropy(measure: MarkovMeasure) -> float:
    """``-sum_i p_i sum_j P_ij log P_ij``."""
    P, p = measure.P, measure.p
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-(p[:, None] * P * logs).sum())


# --------------------------------------------------------------------------
# word avoidance
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AvoidanceQuery:
    word: tuple[int, ...]
    m: int
    probability: float
    rate: float
    constant: float
    probabilities: tuple[float, ...]  # horizons 1 .. m

    def to_csv(self) -> str:
        lines = ["m,probability,bound"]
        for k, pr in enumerate(self.probabilities, start=1):
            lines.append(f"{k},{pr!r},{self.constant * self.rate ** k!r}")
        return "\n".join(lines) + "\n"


def _failure(word: Sequence[int]) -> list[int]:
    f = [0] * len(word)
    k = 0
    for i in range(1, len(word)):
        while k and word[i] != word[k]:
            k = f[k - 1]
        if word[i] == word[k]:
            k += 1
        f[i] = k
    return f


def _advance(word, fail, k, a) -> int:
    """Matched-prefix length after reading ``a`` with ``k`` letters matched."""
    while k and (k == len(word) or word[k] != a):
        k = fail[k - 1]
    if word[k] == a:
        k += 1
    return k


def avoidance_transfer(measure: MarkovMeasure, word: Sequence[int]):
    r"""
    Transfer matrix of the chain that remembers the current state and the
    length of the longest suffix that is a proper prefix of ``word`` (the
    pattern automaton).  Transitions that complete ``word`` are deleted.
    Returns ``(states, T, initial)`` with ``T`` a sparse matrix and
    ``initial`` the mass of the one-letter paths.
    """
    word = list(word)
    fail = _failure(word)
    L = len(word)
    n = measure.size
    states = [(i, k) for i in range(n) for k in range(L)]
    pos = {s: t for t, s in enumerate(states)}
    rows, cols, vals = [], [], []
    succ = [np.nonzero(measure.P[i])[0] for i in range(n)]
    for (i, k), t in pos.items():
        for j in succ[i]:
            k2 = _advance(word, fail, k, int(j))
            if k2 < L:
                rows.append(t)
                cols.append(pos[(int(j), k2)])
                vals.append(measure.P[i, j])
    T = sparse.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states)))
    init = np.zeros(len(states))
    for i in range(n):
        k = _advance(word, fail, 0, i)
        if k < L:
            init[pos[(i, k)]] += measure.p[i]
    return states, T, init


DENSE_LIMIT = 2000


def spectral_radius(T) -> tuple[float, bool]:
    r"""
    Spectral radius of a sparse nonnegative matrix and whether it is exact
    up to rounding.  Small matrices use a dense eigensolver, larger ones
    ARPACK.  If ARPACK does not converge the bound
    ``||T**k||_inf ** (1/k)`` with ``k`` a few times the size is returned
    instead, flagged as not exact; it is an upper bound.
    """
    n = T.shape[0]
    if n == 0:
        return 0.0, True
    if n <= DENSE_LIMIT:
        return float(max(abs(np.linalg.eigvals(T.toarray())))), True
    try:
        vals = splinalg.eigs(T, k=1, which="LM", return_eigenvectors=False, maxiter=20 * n, tol=1e-12)
        return float(abs(vals[0])), True
    except splinalg.ArpackNoConvergence:
        pass
    w = np.ones(n)
    k = 4 * n
    logs = 0.0
    for _ in range(k):
        w = T @ w
        s = w.max()
        if s == 0:
            return 0.0, True
        logs += math.log(s)
        w /= s
    return math.exp(logs / k), False


def avoidance_probability(measure: MarkovMeasure, word: Sequence[int], m: int) -> AvoidanceQuery:
    r"""
    Probability that a stationary trajectory of ``m`` letters contains no
    occurrence of ``word``, and the exponential decay rate: the spectral
    radius of the transfer matrix of :func:`avoidance_transfer` restricted
    to states reachable from the start.  ``constant`` is the smallest ``C``
    with ``probability(k) <= C rate**k`` for ``k <= m``.
    """
    word = tuple(int(x) for x in word)
    if m < len(word):
        raise ValueError("horizon shorter than the word")
    cyl = cylinder_mass(measure, word)
    if not cyl.admissible or cyl.mass == 0:
        log.warning("word %s has zero mass; it is avoided with probability one", word)
        return AvoidanceQuery(word, m, 1.0, 1.0, 1.0, tuple([1.0] * m))
    states, T, init = avoidance_transfer(measure, word)
    TT = T.T.tocsr()
    v = init
    probs = []
    for _ in range(m):
        probs.append(float(v.sum()))
        v = TT @ v
    live = np.nonzero(_reachable(T, np.nonzero(init)[0]))[0]
    rate, exact = spectral_radius(T[live][:, live])
    if not exact:
        log.warning("decay rate of %s is an upper bound (eigensolver did not converge)", word)
    if rate > 0:
        const = max(pr / rate ** k for k, pr in enumerate(probs, start=1))
    else:
        const = max(probs) if any(probs) else 0.0
    return AvoidanceQuery(word, m, probs[-1], rate, const, tuple(probs))


def _reachable(T, init_support) -> np.ndarray:
    T = sparse.csr_matrix(T)
    seen = np.zeros(T.shape[0], dtype=bool)
    stack = list(map(int, init_support))
    seen[stack] = True
    while stack:
        u = stack.pop()
        for v in T.indices[T.indptr[u]:T.indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


# --------------------------------------------------------------------------
# Monte-Carlo transition estimate
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TransitionEstimate:
    r"""
    Empirical frequencies of the full splits selected by random measures.
    An approximation, not the exact transition probabilities.
    """

    node: int
    labels: tuple[str, ...]
    targets: tuple[int | None, ...]
    counts: tuple[int, ...]
    samples: int
    rng_seed: int

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.samples for c in self.counts)

    @property
    def standard_errors(self) -> tuple[float, ...]:
        return tuple(math.sqrt(f * (1 - f) / self.samples) for f in self.frequencies)

    def to_dict(self) -> dict:
        return {"node": self.node, "samples": self.samples, "rng_seed": self.rng_seed,
                "approximation": "Monte-Carlo, uniform on the normalized cone",
                "rows": [{"choice": l, "target": t, "count": c, "frequency": f, "stderr": s}
                         for l, t, c, f, s in zip(self.labels, self.targets, self.counts,
                                                   self.frequencies, self.standard_errors)]}


def sample_cone(track, rng: random.Random, bits: int = 30, method: str = "auto") -> list[Fraction]:
    r"""
    Rational weight vector uniformly distributed (up to the dyadic grid of
    ``bits`` bits) on the slice ``{sum of weights = 1}`` of the cone of
    transverse measures.

    A point of the cone is determined by its weights on the free
    coordinates of the switch equations.  Points are drawn uniformly from
    the box spanned on those coordinates by the vertex cycles scaled onto
    the slice, rejected unless they lie in the pyramid between the origin
    and the slice, and then scaled onto the slice.  Radial projection of the
    uniform distribution on a pyramid is uniform on its base.

    When the cone is simplicial the slice is the simplex of the scaled
    vertex cycles, and the spacings of sorted uniform numbers give uniform
    barycentric coordinates directly.  ``method="reject"`` forces the
    rejection sampler.
    """
    free, rows, top, simplex = _cone_chart(track)
    scale = 1 << bits
    if simplex and method != "reject":
        cuts = sorted(Fraction(rng.getrandbits(bits), scale) for _ in range(len(simplex) - 1))
        t = [b - a for a, b in zip([Fraction(0)] + cuts, cuts + [Fraction(1)])]
        return [sum((ti * v[i] for ti, v in zip(t, simplex)), Fraction(0)) for i in range(len(rows))]
    while True:
        x = [Fraction(rng.getrandbits(bits), scale) * t for t in top]
        mu = [sum((r[k] * x[k] for k in range(len(free)) if r[k]), Fraction(0)) for r in rows]
        if all(v >= 0 for v in mu):
            total = sum(mu)
            if 0 < total <= 1:
                return [v / total for v in mu]


_CHARTS: dict[bytes, tuple] = {}


def _cone_chart(track):
    r"""Free coordinates of the switch equations, the expression of every
    weight in them, and the largest value of each free coordinate on the
    slice ``{sum of weights = 1}`` of the cone."""
    key = track.code
    if key in _CHARTS:
        return _CHARTS[key]
    eqs = [[Fraction(c) for c in row] for row in track.switch_matrix]
    kern = cones._kernel(eqs, track.num_branches)
    # kernel vectors are unit on one free coordinate each
    free = [next(i for i, x in enumerate(v) if x == 1 and all(w[i] == 0 for w in kern if w is not v))
            for v in kern]
    rows = [[v[i] for v in kern] for i in range(track.num_branches)]
    # the slice is the convex hull of the scaled vertex cycles
    cycles = cones.vertex_cycles(track)
    top = [max(Fraction(c[i], sum(c)) for c in cycles) for i in free]
    simplex = None
    if len(cycles) == len(free):
        simplex = [[Fraction(x, sum(c)) for x in c] for c in cycles]
    _CHARTS[key] = (free, rows, top, simplex)
    return _CHARTS[key]


def lebesgue_transitions_mc(graph: TypeGraph, node: int, samples: int, rng_seed: int,
                            chunk: int = 1000) -> TransitionEstimate:
    r"""
    Estimate the transition probabilities out of ``node`` by sampling
    measures uniformly on the normalized cone of its representative and
    recording the full split each selects (the compatible direction at every
    large branch).  Chunks of ``chunk`` samples use independent generators
    derived from ``rng_seed``, so the result does not depend on how chunks
    are scheduled.
    """
    track = graph.representatives[node]
    out = graph.out_edges(node)
    if not out:
        raise ValueError(f"node {node} has no outgoing edges")
    by_label = {e.choice: e.target for e in out}
    counts: dict[str, int] = {lab: 0 for lab in by_label}
    large = track.large_branches()
    done = 0
    k = 0
    while done < samples:
        rng = random.Random(f"{rng_seed}:{k}")
        for _ in range(min(chunk, samples - done)):
            mu = sample_cone(track, rng)
            lab = choice_label({e: compatible_direction(track, mu, e) for e in large})
            counts[lab] = counts.get(lab, 0) + 1
        done += min(chunk, samples - done)
        k += 1
    labels = tuple(sorted(counts))
    return TransitionEstimate(node, labels, tuple(by_label.get(l) for l in labels),
                              tuple(counts[l] for l in labels), samples, rng_seed)
