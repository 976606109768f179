r"""
The subshift of finite type over numbered combinatorial types.

A node is a numbered class (numbered track up to numbered shifts) taken up to
numbering-preserving fat-graph isomorphism, which is how the action of the
mapping class group is quotiented out.  Its code is the canonical code of a
distinguished member of the shift orbit, the one in which every fan is a
left comb (see :func:`shift_class`).

Each node stores one member of its class as representative: the track by
which the class was first reached (or the seed itself).  Edges are the full
splits of that representative whose result is recurrent.  Splits do not
commute with shifts, so the edge set depends on the stored member; storing
the member that was actually reached keeps the construction equivariant
under renumbering, which is what lets closed splitting orbits (see
:mod:`ttdyn.orbits`) appear as cycles.

The carrying matrix of an edge ``i -> j`` maps weights on the representative
of ``j`` to weights on the representative of ``i``: the full-split matrix,
followed by the shift coordinate change from the split result to the stored
representative of ``j`` when the two differ.
"""

from __future__ import annotations

import itertools
import json
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from . import cones
from .moves import SplitDirection, full_split, shift, shift_matrix
from .track import Track, TrackError, validate

log = logging.getLogger(__name__)

DEFAULT_ORBIT_CAP = 10**6


class OrbitCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ShiftClass:
    code: bytes
    representative: Track
    to_rep: np.ndarray  # weights on the input track = to_rep @ weights on representative
    orbit_size: int


def _unit(n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=object)
    for i in range(n):
        m[i, i] = 1
    return m


def shift_orbit(track: Track, cap: int = DEFAULT_ORBIT_CAP) -> dict[bytes, tuple[Track, bytes | None, int | None]]:
    r"""
    Breadth-first search over numbered shifts.  Returns ``code -> (track,
    parent code, mixed branch shifted to reach it from the parent)``.

    The orbit is a product of the orbits of the individual fans (see
    :func:`fans`) and grows quickly; :func:`shift_class` avoids enumerating it.
    """
    start = track.code
    seen = {start: (track, None, None)}
    queue = deque([track])
    while queue:
        t = queue.popleft()
        for m in t.mixed_branches():
            s = shift(t, m)
            c = s.code
            if c not in seen:
                seen[c] = (s, t.code, m)
                if len(seen) > cap:
                    raise OrbitCapExceeded(f"shift orbit exceeds {cap} tracks")
                queue.append(s)
    return seen


def fans(track: Track) -> list[tuple[list[int], list[int]]]:
    r"""
    Partition into fans: the components of the switches joined by mixed
    branches.  Each fan is a binary tree hanging off the end of a large
    branch; a shift only rearranges the switches of one fan, so shifts in
    different fans commute.  Returns ``(switch indices, mixed branches)``
    per fan, both sorted.
    """
    parent = list(range(track.num_switches))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    mixed = track.mixed_branches()
    for m in mixed:
        (i, _), (j, _) = track.endpoints(m)
        parent[find(i)] = find(j)
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for i in range(track.num_switches):
        groups.setdefault(find(i), ([], []))[0].append(i)
    for m in mixed:
        groups[find(track.endpoints(m)[0][0])][1].append(m)
    return sorted(groups.values())


@dataclass(frozen=True)
class Fan:
    r"""
    A fan: a rooted binary tree of switches joined by mixed branches.

    ``root`` is the half-branch in the large slot of the root switch (the
    end of a large branch), ``leaves`` the half-branches in the small slots
    that do not lead to another switch of the fan, in left-to-right order,
    and ``clades`` maps every mixed branch to the positions of the leaves
    below it.
    """

    switches: tuple[int, ...]
    root: tuple[int, int]
    leaves: tuple[tuple[int, int], ...]
    clades: dict

    @property
    def mixed(self) -> list[int]:
        return sorted(self.clades)


def fan_structure(track: Track, members: Sequence[int]) -> Fan | None:
    r"""
    Tree structure of a fan, or ``None`` if the mixed branches of the fan
    close up into a cycle (no root).
    """
    sw = track.switches
    members = set(members)
    roots = []
    for i in members:
        h = sw[i][0]
        other = track.slot_of[(h[0], 1 - h[1])][0]
        if not (track.branch_classes[h[0]].value == "mixed" and other in members):
            roots.append(i)
    if len(roots) != 1:
        return None
    leaves: list[tuple[int, int]] = []
    clades: dict[int, list[int]] = {}

    def walk(i):
        first = len(leaves)
        for slot in (1, 2):
            h = sw[i][slot]
            o = (h[0], 1 - h[1])
            j, k = track.slot_of[o]
            if k == 0 and j in members and track.branch_classes[h[0]].value == "mixed":
                lo = len(leaves)
                walk(j)
                clades[h[0]] = list(range(lo, len(leaves)))
            else:
                leaves.append(h)
        return first

    walk(roots[0])
    if sum(1 for _ in clades) != len(members) - 1:
        return None
    return Fan(tuple(sorted(members)), sw[roots[0]][0], tuple(leaves),
               {m: tuple(c) for m, c in clades.items()})


def _comb(fan: Fan) -> list[tuple]:
    r"""
    Switch triples of the left comb on the leaves of ``fan``: the root splits
    off the last leaf, the next switch the second to last, and so on.  The
    mixed labels are assigned in increasing order from the root down.
    """
    labels = fan.mixed
    n = len(fan.leaves)
    out = []
    upper = fan.root
    for k, m in enumerate(labels):
        # clade of m: leaves 0 .. n-2-k
        out.append((upper, (m, 0), fan.leaves[n - 1 - k]))
        upper = (m, 1)
    out.append((upper, fan.leaves[0], fan.leaves[1]))
    return out


def _clade_matrix(track: Track, fan: Fan) -> dict[int, dict[int, int]]:
    rows = {}
    for m, pos in fan.clades.items():
        row: dict[int, int] = {}
        for p in pos:
            b = fan.leaves[p][0]
            row[b] = row.get(b, 0) + 1
        rows[m] = row
    return rows


def _fan_key(switches, members) -> tuple:
    return tuple(sorted(tuple(b for b, _ in switches[i]) for i in members))


def _fan_orbit(track: Track, members: list[int], mixed: list[int], cap: int):
    r"""
    Brute-force shift orbit of one fan, keyed by its sorted switch triples.
    Used for fans whose mixed branches contain a cycle and as an independent
    check of the comb construction.
    """
    key0 = _fan_key(track.switches, members)
    seen = {key0: (track, None, None)}
    queue = deque([track])
    while queue:
        t = queue.popleft()
        kt = _fan_key(t.switches, members)
        for m in mixed:
            try:
                s = shift(t, m)
            except TrackError:
                continue
            k = _fan_key(s.switches, members)
            if k not in seen:
                seen[k] = (s, kt, m)
                if len(seen) > cap:
                    raise OrbitCapExceeded(f"fan shift orbit exceeds {cap} configurations")
                queue.append(s)
    return seen


def shift_class(track: Track, cap: int = DEFAULT_ORBIT_CAP) -> ShiftClass:
    r"""
    Canonical representative of the numbered class of ``track``.

    Shifts act on each fan independently, and on a fan with ``k`` switches
    they realize every binary tree on its ``k + 1`` leaves with every
    assignment of the mixed branch numbers to its inner edges.  The
    representative replaces every fan by the left comb with increasing
    labels (see :func:`_comb`).

    On transverse measures the weight of a mixed branch is the sum of the
    leaf weights below it.  ``to_rep`` keeps all other weights and adds the
    difference of the clade sums to the mixed rows; it is integral with
    determinant one and ``mu_track = to_rep @ mu_rep`` on measures.  Fans
    whose mixed branches close up into a cycle fall back to a search over
    their shift orbit.
    """
    n = track.num_branches
    S = _unit(n)
    idx = track.index
    sw = [list(s) for s in track.switches]
    size = 1
    for members, mixed in fans(track):
        if not mixed:
            continue
        fan = fan_structure(track, members)
        if fan is None:
            orbit = _fan_orbit(track, members, mixed, cap)
            best = min(orbit)
            t = orbit[best][0]
            # walk back the path to accumulate shift matrices
            path = []
            k = best
            while orbit[k][1] is not None:
                path.append(orbit[k][2])
                k = orbit[k][1]
            cur = track
            for m in reversed(path):
                S = S.dot(shift_matrix(cur, m))
                cur = shift(cur, m)
            for i in members:
                sw[i] = list(t.switches[i])
            size *= len(orbit)
            continue
        comb = _comb(fan)
        for i, triple in zip(fan.switches, comb):
            sw[i] = list(triple)
        size *= _fan_orbit_size(len(fan.switches))
        rep_fan = fan_structure(Track(track.surface, tuple(tuple(x) for x in sw)), fan.switches)
        old = _clade_matrix(track, fan)
        new = _clade_matrix(track, rep_fan)
        for m in mixed:
            for b, c in old[m].items():
                S[idx[m], idx[b]] += c
            for b, c in new[m].items():
                S[idx[m], idx[b]] -= c
    rep = Track(track.surface, tuple(tuple(x) for x in sw)).normalized()
    return ShiftClass(rep.code, rep, S, size)


def _fan_orbit_size(k: int) -> int:
    """Binary trees on ``k`` inner vertices times labelings of ``k - 1`` edges."""
    from math import comb, factorial
    return comb(2 * k, k) // (k + 1) * factorial(k - 1)


def shift_class_code(track: Track, cap: int = DEFAULT_ORBIT_CAP) -> bytes:
    """Code of the canonical representative of the numbered shift class."""
    return shift_class(track, cap).code


def type_code(track: Track, up_to_shifts: bool = True) -> tuple[bytes, dict[int, int]]:
    r"""
    Code of the combinatorial type of ``track`` with the numbering forgotten,
    together with the labeling ``branch -> canonical number`` realizing it.

    Shifts are absorbed by passing to the comb representative first.  The
    canonical labeling numbers branches in order of first appearance in a
    breadth-first traversal from a start switch (slots read in the order
    large, left, right); the lexicographically smallest traversal over all
    start switches wins.  Two numbered tracks have equal type codes iff an
    orientation preserving homeomorphism maps one onto a shift of the other
    (onto the other itself if ``up_to_shifts`` is false).
    """
    rep = shift_class(track).representative if up_to_shifts else track
    sw = rep.switches
    best = None
    for s0 in range(rep.num_switches):
        num: dict[int, int] = {}
        rows = []
        seen = {s0}
        queue = deque([s0])
        while queue:
            i = queue.popleft()
            row = []
            for b, end in sw[i]:
                if b not in num:
                    num[b] = len(num) + 1
                row.append(num[b])
                j = rep.slot_of[(b, 1 - end)][0]
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
            rows.append(tuple(row))
        key = tuple(rows)
        if best is None or key < best[0]:
            best = (key, num)
    code = ";".join(",".join(map(str, r)) for r in best[0]).encode()
    return code, best[1]


def type_isomorphism(a: Track, b: Track, up_to_shifts: bool = True) -> dict[int, int] | None:
    """Branch bijection ``a -> b`` of a type isomorphism, or ``None``."""
    ca, fa = type_code(a, up_to_shifts)
    cb, fb = type_code(b, up_to_shifts)
    if ca != cb:
        return None
    inv = {v: k for k, v in fb.items()}
    return {k: inv[v] for k, v in fa.items()}


def choice_vectors(track: Track) -> list[dict[int, SplitDirection]]:
    large = sorted(track.large_branches())
    return [dict(zip(large, dirs))
            for dirs in itertools.product((SplitDirection.LEFT, SplitDirection.RIGHT), repeat=len(large))]


def choice_label(choices: dict[int, SplitDirection]) -> str:
    return "".join(f"{e}{SplitDirection(d).value}" for e, d in sorted(choices.items()))


def parse_choice_label(label: str) -> dict[int, SplitDirection]:
    out, num = {}, ""
    for ch in label:
        if ch.isdigit():
            num += ch
        else:
            out[int(num)] = SplitDirection(ch)
            num = ""
    return out


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    choice: str
    matrix: np.ndarray = field(compare=False, repr=False)
    shifts: int = 0


@dataclass
class Expansion:
    edges: list[tuple[str, bytes, Track, np.ndarray, np.ndarray]]
    dropped: int


def expand(track: Track, orbit_cap: int = DEFAULT_ORBIT_CAP) -> Expansion:
    r"""
    All full splits of ``track``.  Returns, per recurrent result, the choice
    label, the class code of the result, the result itself (normalized),
    the full-split matrix and the shift matrix ``to_rep`` of the result's
    class (see :func:`shift_class`); non-recurrent results are counted.
    """
    out = []
    dropped = 0
    for ch in choice_vectors(track):
        new, C, _ = full_split(track, ch)
        if not cones.is_recurrent(new):
            dropped += 1
            continue
        sc = shift_class(new, orbit_cap)
        out.append((choice_label(ch), sc.code, new.normalized(), C, sc.to_rep))
    return Expansion(out, dropped)


def _unshift(to_rep: np.ndarray) -> np.ndarray:
    r"""
    Inverse of a ``to_rep`` matrix.  It is ``I + N`` with ``N`` supported on
    (mixed row, small column) entries, so ``N @ N = 0``.
    """
    return 2 * _unit(to_rep.shape[0]) - to_rep


@dataclass
class TypeGraph:
    r"""
    Materialized subgraph of the subshift.  ``codes[i]`` and
    ``representatives[i]`` describe node ``i``; ``edges`` are sorted by
    ``(source, target, choice)``.  Nodes are numbered in sorted code order so
    the graph does not depend on the exploration schedule.
    """

    codes: list[bytes]
    representatives: list[Track]
    edges: list[Edge]
    budget: int
    truncated: bool
    dropped_edges: int
    frontier_edges: int = 0
    expanded: list[bool] = field(default_factory=list)

    def __post_init__(self):
        self.node_of = {c: i for i, c in enumerate(self.codes)}
        self._out: dict[int, list[Edge]] = {i: [] for i in range(len(self.codes))}
        for e in self.edges:
            self._out[e.source].append(e)
        self._cycles: dict[int, list[tuple[int, ...]]] = {}

    def vertex_cycles(self, i: int) -> list[tuple[int, ...]]:
        if i not in self._cycles:
            self._cycles[i] = cones.vertex_cycles(self.representatives[i])
        return self._cycles[i]

    @property
    def size(self) -> int:
        return len(self.codes)

    def out_edges(self, i: int) -> list[Edge]:
        return self._out[i]

    def edge_between(self, i: int, j: int) -> list[Edge]:
        return [e for e in self._out[i] if e.target == j]

    @property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.size, self.size), dtype=int)
        for e in self.edges:
            A[e.source, e.target] = 1
        return A

    def word_matrix(self, word: Sequence[int], choices: Sequence[str] | None = None) -> np.ndarray:
        r"""
        Product of edge matrices along an admissible word of node indices.
        Where several edges join consecutive nodes the first in sorted order
        is used unless ``choices`` selects one by label.
        """
        n = self.representatives[word[0]].num_branches if word else 0
        M = _unit(n)
        for k, (a, b) in enumerate(zip(word, word[1:])):
            es = self.edge_between(a, b)
            if not es:
                raise ValueError(f"word is not admissible: no edge {a}->{b}")
            if choices is not None:
                es = [e for e in es if e.choice == choices[k]] or es
            M = M.dot(es[0].matrix)
        return M

    def is_admissible(self, word: Sequence[int]) -> bool:
        A = self.adjacency
        return all(A[a, b] for a, b in zip(word, word[1:]))

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "truncated": self.truncated,
            "dropped_edges": self.dropped_edges,
            "frontier_edges": self.frontier_edges,
            "nodes": [
                {"code": c.decode(), "expanded": x, "representative": t.to_dict()}
                for c, t, x in zip(self.codes, self.representatives, self.expanded)
            ],
            "edges": [
                {"source": e.source, "target": e.target, "choice": e.choice, "shifts": e.shifts,
                 "matrix": [[int(x) for x in row] for row in e.matrix]}
                for e in self.edges
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TypeGraph":
        codes = [n["code"].encode() for n in d["nodes"]]
        reps = [Track.from_dict(n["representative"]) for n in d["nodes"]]
        edges = [Edge(e["source"], e["target"], e["choice"],
                      np.array([[int(x) for x in row] for row in e["matrix"]], dtype=object),
                      e.get("shifts", 0))
                 for e in d["edges"]]
        return cls(codes, reps, edges, d["budget"], d["truncated"], d["dropped_edges"],
                   d.get("frontier_edges", 0), [n.get("expanded", True) for n in d["nodes"]])

    @classmethod
    def from_json(cls, text: str) -> "TypeGraph":
        return cls.from_dict(json.loads(text))

    def to_dot(self) -> str:
        lines = ["digraph typegraph {"]
        for i in range(self.size):
            lines.append(f'  n{i} [label="{i}"];')
        for e in self.edges:
            lines.append(f'  n{e.source} -> n{e.target} [label="{e.choice}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_type_graph(seeds: Iterable[Track], node_budget: int, threads: int = 1,
                     orbit_cap: int = DEFAULT_ORBIT_CAP) -> TypeGraph:
    r"""
    Materialize the subshift by breadth-first search over full splits.

    Nodes are discovered level by level; within a level, nodes are expanded
    in code order and each expansion's targets are merged in (choice label)
    order, so the result does not depend on ``threads``.  Once
    ``node_budget`` nodes exist no new nodes are admitted; edges into
    unadmitted nodes are counted in ``frontier_edges`` and the graph is
    flagged ``truncated``.
    """
    if node_budget < 1:
        raise ValueError("node budget must be positive")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("no seeds given")
    known: dict[bytes, Track] = {}
    unshift: dict[bytes, np.ndarray] = {}
    level: list[bytes] = []
    for s in seeds:
        rep = validate(s)
        if not rep.passed:
            raise TrackError(f"invalid seed: {rep.failed}")
        if not cones.is_complete(s):
            raise TrackError("seed is not complete")
        sc = shift_class(s, orbit_cap)
        if sc.code not in known and len(known) < node_budget:
            known[sc.code] = s.normalized()
            unshift[sc.code] = _unshift(sc.to_rep)
            level.append(sc.code)
    raw_edges: list[tuple[bytes, bytes, str, np.ndarray, int]] = []
    dropped = 0
    frontier = 0
    truncated = False
    expanded: set[bytes] = set()

    def work(code):
        return code, expand(known[code], orbit_cap)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while level:
            level = sorted(level)
            results = list(pool.map(work, level)) if pool else [work(c) for c in level]
            nxt: list[bytes] = []
            for code, exp in results:
                expanded.add(code)
                dropped += exp.dropped
                for label, tcode, new, C, to_rep in exp.edges:
                    if tcode not in known:
                        if len(known) >= node_budget:
                            truncated = True
                            frontier += 1
                            continue
                        known[tcode] = new
                        unshift[tcode] = _unshift(to_rep)
                        nxt.append(tcode)
                    if new.code == known[tcode].code:
                        raw_edges.append((code, tcode, label, C, 0))
                    else:
                        raw_edges.append((code, tcode, label, C.dot(to_rep).dot(unshift[tcode]), 1))
            level = nxt
    finally:
        if pool:
            pool.shutdown()
    if len(expanded) < len(known):
        truncated = True
    codes = sorted(known)
    node_of = {c: i for i, c in enumerate(codes)}
    edges = sorted((Edge(node_of[s], node_of[t], lab, M, ns) for s, t, lab, M, ns in raw_edges),
                   key=lambda e: (e.source, e.target, e.choice))
    return TypeGraph(codes, [known[c] for c in codes], edges, node_budget, truncated,
                     dropped, frontier, [c in expanded for c in codes])


# --------------------------------------------------------------------------
# shift analysis
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftAnalysis:
    transitive: bool
    period: int
    mixing: bool
    witness: tuple[int, int] | None


def _reach(A: np.ndarray, i: int) -> set[int]:
    seen, stack = {i}, [i]
    while stack:
        u = stack.pop()
        for v in np.nonzero(A[u])[0]:
            v = int(v)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def strongly_connected_components(A: np.ndarray) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components sorted by smallest member."""
    A = np.asarray(A)
    n = A.shape[0]
    index = {}
    low = {}
    on = set()
    stack: list[int] = []
    comps = []
    counter = 0
    succ = [list(map(int, np.nonzero(A[u])[0])) for u in range(n)]
    for root in range(n):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            u, k = work.pop()
            if k == 0:
                index[u] = low[u] = counter
                counter += 1
                stack.append(u)
                on.add(u)
            recurse = False
            for j in range(k, len(succ[u])):
                v = succ[u][j]
                if v not in index:
                    work.append((u, j + 1))
                    work.append((v, 0))
                    recurse = True
                    break
                if v in on:
                    low[u] = min(low[u], index[v])
            if recurse:
                continue
            if low[u] == index[u]:
                comp = []
                while True:
                    v = stack.pop()
                    on.discard(v)
                    comp.append(v)
                    if v == u:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
    return sorted(comps)


def period(A: np.ndarray) -> int:
    r"""
    Period of a strongly connected 0/1 matrix: the gcd of ``level(u) + 1 -
    level(v)`` over all edges ``u -> v`` for BFS levels from node 0.
    """
    A = np.asarray(A)
    level = {0: 0}
    queue = deque([0])
    g = 0
    while queue:
        u = queue.popleft()
        for v in map(int, np.nonzero(A[u])[0]):
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = gcd(g, abs(level[u] + 1 - level[v]))
    return g


def analyze_shift(A) -> ShiftAnalysis:
    r"""
    Transitivity (strong connectivity), period, mixing (transitive with
    period one) and a certificate ``(i, j)`` with ``a_ij = 1`` and
    ``(A^2)_ij >= 1`` if one exists, off the diagonal when possible.

    EXAMPLES::

        >>> analyze_shift([[1, 1], [1, 0]])
        ShiftAnalysis(transitive=True, period=1, mixing=True, witness=(0, 1))
    """
    A = (np.asarray(A) != 0).astype(int)
    n = A.shape[0]
    if n == 0:
        return ShiftAnalysis(False, 0, False, None)
    transitive = len(_reach(A, 0)) == n and len(_reach(A.T, 0)) == n
    p = period(A) if transitive else 0
    A2 = A @ A
    hits = np.argwhere((A == 1) & (A2 >= 1))
    # prefer i != j; a self-loop is a weaker certificate
    hits = sorted(hits.tolist(), key=lambda h: (h[0] == h[1], h[0], h[1]))
    witness = (int(hits[0][0]), int(hits[0][1])) if hits else None
    return ShiftAnalysis(transitive, p, transitive and p == 1, witness)


def restrict(graph: TypeGraph, nodes: Sequence[int]) -> TypeGraph:
    """Induced subgraph on ``nodes`` (renumbered in the given sorted order)."""
    nodes = sorted(nodes)
    new = {old: i for i, old in enumerate(nodes)}
    edges = [Edge(new[e.source], new[e.target], e.choice, e.matrix, e.shifts)
             for e in graph.edges if e.source in new and e.target in new]
    return TypeGraph([graph.codes[i] for i in nodes], [graph.representatives[i] for i in nodes],
                     edges, graph.budget, graph.truncated, graph.dropped_edges,
                     graph.frontier_edges, [graph.expanded[i] for i in nodes])


def largest_component(graph: TypeGraph) -> TypeGraph:
    """Restriction to the largest strongly connected component with an edge."""
    comps = [c for c in strongly_connected_components(graph.adjacency)
             if len(c) > 1 or graph.adjacency[c[0], c[0]]]
    if not comps:
        raise ValueError("graph has no cycle")
    best = max(comps, key=lambda c: (len(c), [-x for x in c]))
    return restrict(graph, best)


# --------------------------------------------------------------------------
# tight words
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    r"""
    Admissible word: node indices and, for each step, the label of the full
    split realizing it (several edges may join the same pair of nodes).
    """

    nodes: tuple[int, ...]
    choices: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.nodes)


def is_tight_matrix(M: np.ndarray, cycles: Sequence[Sequence[int]] | None = None) -> bool:
    r"""
    Tightness of a carrying-matrix product.  Without ``cycles`` this is
    entrywise positivity.  With the vertex cycles of the last track it is
    the cone criterion: every vertex cycle is mapped to a weight vector that
    is positive on every branch of the first track, i.e. every measure
    carried at the end of the word fills the track at its start.  For
    nonnegative products the two agree; products through shifts may carry
    negative entries, where only the cone criterion is meaningful.
    """
    M = np.asarray(M)
    if cycles is None:
        return bool(np.all(M > 0))
    return all(x > 0 for v in cycles for x in M.dot(list(v)))


def is_tight(graph: TypeGraph, word: Word) -> bool:
    M = graph.word_matrix(word.nodes, word.choices)
    return is_tight_matrix(M, graph.vertex_cycles(word.nodes[-1]))


def find_tight_words(graph: TypeGraph, max_len: int, first_only: bool = True,
                     starts: Sequence[int] | None = None, limit: int = 10**5) -> list[Word]:
    r"""
    Tight words with at most ``max_len`` letters, by breadth-first search
    from every start node, shortest first.  With ``first_only`` one shortest
    tight word per start node is returned.

    A partial word is summarized by its pattern: for each vertex cycle of
    the last track, the set of branches of the first track on which its
    image is positive.  An edge maps the next cone into the current one, so
    the pattern of an extension only depends on the pattern of the prefix
    and grows with it.  Prefixes whose pattern is dominated by one already
    reached at the same node are discarded.  ``limit`` caps the number of
    prefixes kept per level.
    """
    out: list[Word] = []
    starts = range(graph.size) if starts is None else starts
    for s in starts:
        out.extend(_tight_from(graph, s, max_len, first_only, limit))
    return out


def _pattern(M: np.ndarray, cycles) -> tuple[int, ...]:
    out = []
    for v in cycles:
        bits = 0
        for k, x in enumerate(M.dot(list(v))):
            if x > 0:
                bits |= 1 << k
        out.append(bits)
    return tuple(out)


def _tight_from(graph, s, max_len, first_only, limit):
    n = graph.representatives[s].num_branches
    full = (1 << n) - 1
    start = _unit(n)
    frontier = [(Word((s,)), start)]
    seen: dict[int, list[tuple[int, ...]]] = {s: [_pattern(start, graph.vertex_cycles(s))]}
    out = []
    for _ in range(max_len - 1):
        nxt = []
        for word, M in frontier:
            for e in graph.out_edges(word.nodes[-1]):
                P = M.dot(e.matrix)
                pat = _pattern(P, graph.vertex_cycles(e.target))
                w2 = Word(word.nodes + (e.target,), word.choices + (e.choice,))
                if all(b == full for b in pat):
                    out.append(w2)
                    if first_only:
                        return out
                    continue
                pats = seen.setdefault(e.target, [])
                if any(all(a | b == b for a, b in zip(pat, q)) for q in pats):
                    continue
                pats[:] = [q for q in pats if not all(a | b == a for a, b in zip(pat, q))] + [pat]
                if len(nxt) < limit:
                    nxt.append((w2, P))
        frontier = nxt
        if not frontier:
            break
    return out
