r"""
The suspension layer: periodic loops, dilatations, the roof function and
orbit counting.

A periodic loop is a closed walk in a :class:`~ttdyn.typegraph.TypeGraph`
together with the full split realizing each step.  Its loop matrix maps
weights on the representative at the start back to weights on the same
representative; its dilatation is the spectral radius on the space of
weights satisfying the switch conditions, and the period of the
corresponding closed orbit of the flow is the logarithm of the dilatation.

The roof value at a word ``tau_0 -> tau_1 -> ...`` is
``log(maxL_0(mu) / maxL_1(mu))`` where ``maxL_k`` is the maximal weight on a
large branch of ``tau_k`` and ``mu`` is the measure carried by every track
of the word.  Finite words only pin ``mu`` down to the image of the cone of
the last track; see :func:`roof_along` for the error radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
import mpmath

from . import cones
from .markov import MarkovMeasure, cylinder_mass, shift_entropy
from .track import Track
from .typegraph import TypeGraph, Word, _unit, strongly_connected_components


class LoopNotClosed(ValueError):
    pass


class LoopBudgetExceeded(RuntimeError):
    pass


# --------------------------------------------------------------------------
# periodic loops
# --------------------------------------------------------------------------

def canonical_rotation(nodes: Sequence[int], choices: Sequence[str]) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """Lexicographically smallest rotation of the cyclic sequence of (node, choice) steps."""
    steps = list(zip(nodes, choices))
    if not steps:
        return (), ()
    lo = min(nodes)
    best = min(steps[k:] + steps[:k] for k in range(len(steps)) if nodes[k] == lo)
    return tuple(s[0] for s in best), tuple(s[1] for s in best)


def _is_power(seq: Sequence) -> bool:
    n = len(seq)
    return any(n % d == 0 and all(seq[i] == seq[i % d] for i in range(n))
               for d in range(1, n))


@dataclass(frozen=True)
class PeriodicLoop:
    r"""
    Cyclic word: step ``k`` is the edge labeled ``choices[k]`` from
    ``nodes[k]`` to ``nodes[k + 1]`` (indices mod the length).  Stored in
    canonical rotation.
    """

    nodes: tuple[int, ...]
    choices: tuple[str, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.choices):
            raise ValueError("one choice per step is required")

    @classmethod
    def of(cls, nodes: Sequence[int], choices: Sequence[str]) -> "PeriodicLoop":
        return cls(*canonical_rotation(nodes, choices))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def primitive(self) -> bool:
        return not _is_power(list(zip(self.nodes, self.choices)))

    def rotated(self, k: int) -> tuple[tuple[int, ...], tuple[str, ...]]:
        """The steps starting at position ``k`` (not canonical)."""
        k %= max(len(self), 1)
        return self.nodes[k:] + self.nodes[:k], self.choices[k:] + self.choices[:k]

    def power(self, k: int) -> "PeriodicLoop":
        return PeriodicLoop(self.nodes * k, self.choices * k)

    def word(self, repeats: int = 1, start: int = 0) -> Word:
        """The closed walk as a :class:`Word`, ``repeats`` times around."""
        nodes, choices = self.rotated(start)
        return Word(nodes * repeats + nodes[:1], choices * repeats)


def _edge(graph: TypeGraph, a: int, b: int, choice: str | None):
    for e in graph.edge_between(a, b):
        if choice is None or e.choice == choice:
            return e
    raise LoopNotClosed(f"no edge {a}->{b}" + (f" labeled {choice}" if choice else ""))


def _steps(graph: TypeGraph, loop) -> list:
    if isinstance(loop, PeriodicLoop):
        n = len(loop)
        return [_edge(graph, loop.nodes[k], loop.nodes[(k + 1) % n], loop.choices[k]) for k in range(n)]
    nodes = list(loop.nodes)
    if nodes[0] != nodes[-1]:
        raise LoopNotClosed(f"word ends at {nodes[-1]}, not at its start {nodes[0]}")
    choices = list(loop.choices) or [None] * (len(nodes) - 1)
    return [_edge(graph, a, b, c) for a, b, c in zip(nodes, nodes[1:], choices)]


def loop_matrix(graph: TypeGraph, loop: PeriodicLoop | Word) -> np.ndarray:
    r"""
    Product of the carrying matrices around a loop, in traversal order, as
    an integer object array.  A :class:`Word` must end where it starts; a
    one-letter word gives the identity.
    """
    steps = _steps(graph, loop)
    start = loop.nodes[0] if len(loop.nodes) else 0
    M = _unit(graph.representatives[start].num_branches)
    for e in steps:
        M = M.dot(e.matrix)
    return M


# --------------------------------------------------------------------------
# restriction to the weight space
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    r"""
    Coordinates on the space ``W`` of weights satisfying the switch
    conditions: ``w = basis @ w[free]`` for every ``w`` in ``W``.
    """

    free: tuple[int, ...]
    basis: np.ndarray  # b x dim, Fraction entries


def chart(track: Track) -> Chart:
    eqs = [[Fraction(c) for c in row] for row in track.switch_matrix]
    kern = cones._kernel(eqs, track.num_branches)
    free = []
    for v in kern:
        free.append(next(i for i, x in enumerate(v)
                         if x == 1 and all(w[i] == 0 for w in kern if w is not v)))
    basis = np.array([[v[i] for v in kern] for i in range(track.num_branches)], dtype=object)
    return Chart(tuple(free), basis)


def restricted(M: np.ndarray, source: Chart, target: Chart) -> np.ndarray:
    r"""
    Matrix of ``M: W(target) -> W(source)`` in chart coordinates, where
    ``M`` maps weights on the target track to weights on the source track.
    """
    return M.dot(target.basis)[list(source.free), :]


class _Charts:
    def __init__(self, graph: TypeGraph):
        self.graph = graph
        self.charts: dict[int, Chart] = {}
        self.edges: dict[tuple[int, int, str], np.ndarray] = {}

    def chart(self, i: int) -> Chart:
        if i not in self.charts:
            self.charts[i] = chart(self.graph.representatives[i])
        return self.charts[i]

    def edge(self, e) -> np.ndarray:
        key = (e.source, e.target, e.choice)
        if key not in self.edges:
            self.edges[key] = restricted(e.matrix, self.chart(e.source), self.chart(e.target))
        return self.edges[key]


_CHARTS: dict[int, _Charts] = {}


def _charts(graph: TypeGraph) -> _Charts:
    c = _CHARTS.get(id(graph))
    if c is None or c.graph is not graph:
        c = _CHARTS[id(graph)] = _Charts(graph)
    return c


def restricted_loop_matrix(graph: TypeGraph, loop: PeriodicLoop | Word) -> np.ndarray:
    """The loop matrix restricted to the weight space of the start node, in chart coordinates."""
    # carrying matrices preserve the weight spaces, so restricting the
    # integer product once equals the product of the restricted steps
    c = _charts(graph).chart(loop.nodes[0])
    return restricted(loop_matrix(graph, loop), c, c)


# --------------------------------------------------------------------------
# dilatation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Dilatation:
    r"""
    ``lam`` is the spectral radius of the loop matrix on the weight space,
    from the roots of the exact characteristic polynomial; ``period`` is its
    logarithm.  ``residual`` is the relative residual ``|Mv - lam v| / |Mv|``
    of the power-iteration eigenvector ``v`` started in the cone, and
    ``primitive`` records whether it reached ``tol``.  For non-primitive
    matrices ``peripheral`` counts the eigenvalues (with multiplicity) of
    modulus ``lam``.
    """

    lam: float
    period: float
    residual: float
    primitive: bool
    peripheral: int
    vector: tuple[float, ...] = field(compare=False, repr=False, default=())


def _to_float(M: np.ndarray) -> tuple[np.ndarray, int]:
    """``M`` as floats scaled by ``2**-shift`` to stay within range."""
    vals = [Fraction(x) for x in np.ravel(M)]
    big = max((abs(x.numerator).bit_length() - abs(x.denominator).bit_length() for x in vals if x),
              default=0)
    shift = max(0, big - 900)
    out = np.array([float(x / (1 << shift)) if shift else float(x) for x in vals]).reshape(M.shape)
    return out, shift


def _spectral_radius_exact(R: np.ndarray) -> tuple[float, float, int]:
    r"""
    ``(radius, log radius, number of eigenvalues of that modulus)`` from a
    multiprecision eigensolve of the exact matrix.  The working precision
    exceeds the size of the entries by 60 digits, which keeps even
    defective eigenvalues accurate far beyond double precision.
    """
    vals = [Fraction(v) for v in np.ravel(R)]
    digits = max((len(str(abs(v.numerator))) + len(str(v.denominator)) for v in vals), default=1)
    with mpmath.workdps(60 + 2 * digits):
        A = mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in vals[i * R.shape[1]:(i + 1) * R.shape[1]]]
                           for i in range(R.shape[0])])
        ev = mpmath.eig(A, left=False, right=False)
        mods = [abs(z) for z in ev]
        top = max(mods)
        tol = mpmath.mpf(10) ** -30 * max(top, 1)
        count = sum(1 for m in mods if abs(m - top) <= tol)
        log_top = float(mpmath.log(top)) if top > 0 else -math.inf
        return float(top), log_top, count


def dilatation(M, start=None, tol: float = 1e-10, max_iter: int = 100_000) -> Dilatation:
    r"""
    Dilatation of a square matrix preserving a cone.

    ``start`` is a vector in the cone to start power iteration from (all
    ones by default).  The spectral radius itself is taken from the exact
    characteristic polynomial; power iteration supplies the eigenvector, its
    residual and the primitivity flag.

    EXAMPLES::

        >>> round(dilatation([[1, 1], [1, 0]]).lam, 10)
        1.6180339887
    """
    R = np.array(M, dtype=object)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("matrix must be square")
    lam, period, count = _spectral_radius_exact(R)
    F, _ = _to_float(R)
    v = np.ones(R.shape[0]) if start is None else np.array([float(x) for x in start])
    v /= np.linalg.norm(v)
    residual = math.inf
    if count != 1:
        # several peripheral eigenvalues: iteration cannot settle, keep it short
        max_iter = min(max_iter, 1000)
    for _ in range(max_iter):
        w = F @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        mu = float(v @ w)
        residual = float(np.linalg.norm(w - mu * v) / nw)
        v = w / nw
        if residual <= tol:
            break
    primitive = residual <= tol and count == 1
    return Dilatation(lam, period, residual, primitive, count, tuple(float(x) for x in v))


def loop_dilatation(graph: TypeGraph, loop: PeriodicLoop | Word) -> Dilatation:
    r"""
    Dilatation of a loop: the loop matrix restricted to the weight space of
    its start node, with power iteration started at the sum of the vertex
    cycles.
    """
    R = restricted_loop_matrix(graph, loop)
    c = _charts(graph).chart(loop.nodes[0])
    total = np.sum(np.array(graph.vertex_cycles(loop.nodes[0]), dtype=object), axis=0)
    return dilatation(R, start=[total[i] for i in c.free])


# --------------------------------------------------------------------------
# roof function
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RoofValue:
    r"""
    ``value`` is the roof at the barycenter of the candidate cone;
    ``spread`` the largest deviation over its extreme rays; ``radius`` a
    bound on the deviation over the whole cone, so the exact roof of every
    measure carried by the word lies within ``radius`` of ``value``.
    """

    value: float
    radius: float
    spread: float
    depth: int


def _log_ratio(a: int, b: int) -> float:
    return math.log(a) - math.log(b)


def _max_large(track: Track, v) -> int:
    return max(v[track.index[b]] for b in track.large_branches())


def _roof(t0: Track, t1: Track, cands1: list, cands0: list, depth: int) -> RoofValue:
    nu1 = [sum(c[k] for c in cands1) for k in range(len(cands1[0]))]
    nu0 = [sum(c[k] for c in cands0) for k in range(len(cands0[0]))]
    value = _log_ratio(_max_large(t0, nu0), _max_large(t1, nu1))
    spread = 0.0
    radius = 0.0
    for u1, u0 in zip(cands1, cands0):
        m0, m1 = _max_large(t0, u0), _max_large(t1, u1)
        if m0 > 0 and m1 > 0:
            spread = max(spread, abs(_log_ratio(m0, m1) - value))
        r0 = [Fraction(x, y) for x, y in zip(u0, nu0) if y]
        r1 = [Fraction(x, y) for x, y in zip(u1, nu1) if y]
        if min(r0) == 0 or min(r1) == 0:
            radius = math.inf
            continue
        hi = math.log(max(r0)) - math.log(min(r1))
        lo = math.log(max(r1)) - math.log(min(r0))
        radius = max(radius, hi, lo)
    return RoofValue(max(value, 0.0), radius, spread, depth)


def roof_along(graph: TypeGraph, word: Word, depth: int) -> list[RoofValue]:
    r"""
    Roof values at positions ``0 .. len(word) - 1 - depth`` of a word, all
    computed against the cone of the last track: at position ``k`` the
    candidates are the images on ``tau_k`` and ``tau_(k+1)`` of the vertex
    cycles of the last track, so the evaluation depth there is
    ``len(word) - 1 - k >= depth``.

    The radius is a Hilbert-metric bound.  For a candidate ``u`` and the
    barycenter ``nu`` (the sum of all candidates), the ratios ``u_b / nu_b``
    bound how much a monotone homogeneous function such as ``maxL`` can
    change; by the mediant inequality the extreme rays bound every point of
    the cone.  The radius is infinite while some candidate vanishes on a
    branch where the barycenter does not, i.e. before the word turns tight.
    """
    nodes = list(word.nodes)
    steps = len(nodes) - 1
    if not 1 <= depth <= steps:
        raise ValueError(f"depth {depth} needs a word with at least {depth} steps; got {steps}")
    choices = list(word.choices) or [None] * steps
    edges = [_edge(graph, a, b, c) for a, b, c in zip(nodes, nodes[1:], choices)]
    reps = graph.representatives
    cands = [np.array(v, dtype=object) for v in graph.vertex_cycles(nodes[-1])]
    # cands holds the candidates on tau_(k+1) when position k is processed
    for k in range(steps - 1, steps - depth, -1):
        cands = [edges[k].matrix.dot(c) for c in cands]
    out = []
    for k in range(steps - depth, -1, -1):
        img = [edges[k].matrix.dot(c) for c in cands]
        out.append(_roof(reps[nodes[k]], reps[nodes[k + 1]],
                         [list(map(int, c)) for c in cands], [list(map(int, c)) for c in img],
                         steps - k))
        cands = img
    out.reverse()
    return out


def roof_estimate(graph: TypeGraph, word: Word, depth: int) -> RoofValue:
    """Roof value at the first letter of ``word`` evaluated at exactly ``depth`` steps."""
    nodes = word.nodes[:depth + 1]
    choices = word.choices[:depth] if word.choices else ()
    if len(nodes) < depth + 1:
        raise ValueError(f"depth {depth} exceeds the word ({len(word.nodes) - 1} steps)")
    return roof_along(graph, Word(tuple(nodes), tuple(choices)), depth)[0]


@dataclass(frozen=True)
class LoopRoof:
    r"""Roof values around one period of a loop and their sum."""

    values: tuple[RoofValue, ...]

    @property
    def total(self) -> float:
        return sum(r.value for r in self.values)

    @property
    def radius(self) -> float:
        return sum(r.radius for r in self.values)

    def window_sums(self, p: int) -> list[float]:
        v = [r.value for r in self.values]
        n = len(v)
        return [sum(v[(k + j) % n] for j in range(p)) for k in range(n)]


def loop_roof(graph: TypeGraph, loop: PeriodicLoop, depth: int) -> LoopRoof:
    r"""
    Roof values at every position of a periodic loop, each evaluated at
    depth at least ``depth`` along the periodic continuation.
    """
    n = len(loop)
    reps = -(-(n + depth) // n)
    vals = roof_along(graph, loop.word(reps), depth)
    return LoopRoof(tuple(vals[:n]))


# --------------------------------------------------------------------------
# loop enumeration and counting
# --------------------------------------------------------------------------

@dataclass
class LoopCensus:
    loops: list[PeriodicLoop]
    max_len: int
    partial: bool

    @property
    def primitive(self) -> int:
        return sum(1 for l in self.loops if l.primitive)

    @property
    def imprimitive(self) -> int:
        return len(self.loops) - self.primitive


def enumerate_loops(graph: TypeGraph, max_len: int, max_loops: int = 100_000) -> LoopCensus:
    r"""
    All periodic loops with at most ``max_len`` steps, one per rotation
    class, sorted by length and then canonical rotation.  These are the
    closed walks of the graph up to rotation, powers included; distinct
    edges joining the same nodes give distinct loops.

    Each loop is found from its smallest node ``s`` by depth-first search
    through nodes ``>= s`` of the strongly connected component of ``s``,
    pruned by the distance back to ``s``; the search continues through
    ``s`` so walks returning to it several times are found too.  If more
    than ``max_loops`` loops exist the result is flagged ``partial``.
    """
    if max_len < 1:
        return LoopCensus([], max_len, False)
    A = graph.adjacency
    comp_of = {}
    for ci, comp in enumerate(strongly_connected_components(A)):
        for v in comp:
            comp_of[v] = ci
    found: set[PeriodicLoop] = set()
    partial = False
    for s in range(graph.size):
        allowed = [v >= s and comp_of[v] == comp_of[s] for v in range(graph.size)]
        dist = _distance_to(graph, s, allowed)
        stack = [(s, iter(graph.out_edges(s)))]
        path: list = []
        while stack:
            v, it = stack[-1]
            e = next(it, None)
            if e is None:
                stack.pop()
                if path:
                    path.pop()
                continue
            t = e.target
            if not allowed[t] or dist.get(t, math.inf) + len(path) + 1 > max_len:
                continue
            if t == s:
                loop = PeriodicLoop.of([x.source for x in path] + [e.source],
                                       [x.choice for x in path] + [e.choice])
                found.add(loop)
                if len(found) > max_loops:
                    partial = True
                    break
            path.append(e)
            stack.append((t, iter(graph.out_edges(t))))
        if partial:
            break
    loops = sorted(found, key=lambda l: (len(l), l.nodes, l.choices))
    return LoopCensus(loops, max_len, partial)


def _distance_to(graph: TypeGraph, s: int, allowed) -> dict[int, int]:
    r"""Steps from each allowed node to ``s`` inside the allowed set."""
    rev: dict[int, list[int]] = {}
    for e in graph.edges:
        rev.setdefault(e.target, []).append(e.source)
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for u in rev.get(v, []):
                if allowed[u] and u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


@dataclass(frozen=True)
class CountReport:
    r"""
    ``counts[k]`` is the number of loops with period at most ``r_grid[k]``
    and ``estimates[k] = log(counts[k]) / r_grid[k]`` (nan while zero).
    ``target`` and ``bound`` are the reference lines ``dim`` and
    ``dim * (dim + 1)`` for the surface; these are symbolic loop counts.
    """

    r_grid: tuple[float, ...]
    counts: tuple[int, ...]
    estimates: tuple[float, ...]
    target: int | None = None
    bound: int | None = None

    def to_csv(self) -> str:
        lines = [f"# reference lines: target {self.target}, bound {self.bound}",
                 "r,n,estimate"]
        for r, n, e in zip(self.r_grid, self.counts, self.estimates):
            lines.append(f"{r!r},{n},{float(e)!r}")
        return "\n".join(lines) + "\n"


def count_report(periods: Iterable[float], r_grid: Sequence[float], dim: int | None = None) -> CountReport:
    r"""
    Counting function of loop periods on ``r_grid``.  ``periods`` are the
    logarithms of the dilatations; ``dim`` is ``6g - 6 + 2m``.
    """
    ps = np.sort(np.asarray(list(periods), dtype=float))
    counts = tuple(int(np.searchsorted(ps, r, side="right")) for r in r_grid)
    est = tuple(math.log(n) / r if n > 0 and r > 0 else math.nan for n, r in zip(counts, r_grid))
    return CountReport(tuple(float(r) for r in r_grid), counts, est,
                       dim, None if dim is None else dim * (dim + 1))


PERIOD_TOL = 1e-9


def counted_periods(graph: TypeGraph, loops: Iterable[PeriodicLoop]) -> tuple[list[tuple[int, float]], int]:
    r"""
    ``(length, period)`` of the loops entering the counting function, and
    the number of loops left out.  Only primitive words with dilatation above one count:
    powers retrace a shorter loop, and loops of dilatation one (Dehn twist
    loops around a twist connector) are not pseudo-Anosov.
    """
    out, skipped = [], 0
    for loop in loops:
        if not loop.primitive:
            skipped += 1
            continue
        d = loop_dilatation(graph, loop)
        if d.period <= PERIOD_TOL:
            skipped += 1
            continue
        out.append((len(loop), d.period))
    return out, skipped


def complete_range(lengths: Sequence[int], periods: Sequence[float], max_len: int,
                   tail: int | None = None) -> tuple[float, float]:
    r"""
    Range of periods on which a census up to ``max_len`` steps is plausibly
    complete: from the smallest period to the smallest period among the
    loops in the last ``tail`` lengths (default a tenth of ``max_len``).
    Longer loops may still have smaller periods, so this is a heuristic.
    """
    if not periods:
        return (math.nan, math.nan)
    tail = max(1, max_len // 10) if tail is None else tail
    lo = min(periods)
    late = [p for n, p in zip(lengths, periods) if n > max_len - tail]
    hi = min(late) if late else max(periods)
    return lo, max(lo, hi)


# --------------------------------------------------------------------------
# entropy of the flow
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowEntropy:
    value: float
    error: float
    shift_entropy: float
    mean_roof: float
    mean_roof_radius: float


RoofFunction = Callable[[Sequence[int]], tuple[float, float]]


def flow_entropy(measure: MarkovMeasure, graph: TypeGraph, roof_depth: int,
                 roof: RoofFunction | None = None, max_words: int = 10**6) -> FlowEntropy:
    r"""
    Entropy of the suspension flow: the entropy of the shift divided by the
    mean roof value, the mean taken over the cylinders of
    ``roof_depth + 1`` letters.  ``roof`` maps a word of node indices to
    ``(value, radius)``; by default :func:`roof_estimate` at ``roof_depth``
    using the first edge between consecutive nodes.  The error propagates
    the mean radius.
    """
    if roof is None:
        def roof(w):
            r = roof_estimate(graph, Word(tuple(w)), roof_depth)
            return r.value, r.radius
    h = shift_entropy(measure)
    mean = 0.0
    rad = 0.0
    count = 0
    succ = [np.nonzero(measure.P[i] > 0)[0] for i in range(measure.size)]
    stack = [[i] for i in range(measure.size) if measure.p[i] > 0]
    while stack:
        w = stack.pop()
        if len(w) == roof_depth + 1:
            m = cylinder_mass(measure, w).mass
            v, r = roof(w)
            mean += m * v
            rad += m * r
            count += 1
            if count > max_words:
                raise LoopBudgetExceeded(f"more than {max_words} cylinders")
            continue
        stack.extend(w + [int(j)] for j in succ[w[-1]])
    if mean <= 0:
        raise ValueError("mean roof estimate is not positive; increase the depth")
    value = h / mean
    err = h * rad / (mean * (mean - rad)) if mean > rad else math.inf
    return FlowEntropy(value, err, h, mean, rad)
