r"""
Exact computations on the cone of transverse measures ``V(tau)`` and the cone
of tangential measures ``V*(tau)``.

Weight vectors are lists of :class:`fractions.Fraction` (or ``int``) indexed
by the sorted branch numbers of the track, or mappings ``branch -> weight``.
No floating point is used here.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from . import lp
from .track import Track, TrackError


class DegenerateMeasure(TrackError):
    pass


class EnumerationBudgetExceeded(RuntimeError):
    pass


def as_vector(track: Track, mu) -> list[Fraction]:
    if isinstance(mu, Mapping):
        if set(mu) != set(track.branches):
            raise ValueError("weights must be given for exactly the branches of the track")
        return [Fraction(mu[b]) for b in track.branches]
    vals = [Fraction(x) for x in mu]
    if len(vals) != track.num_branches:
        raise ValueError(f"index mismatch: {len(vals)} weights for {track.num_branches} branches")
    return vals


def check_switch_conditions(track: Track, mu) -> bool:
    """True iff every switch equation ``large = left + right`` holds exactly."""
    w = as_vector(track, mu)
    return all(sum(c * x for c, x in zip(row, w)) == 0 for row in track.switch_matrix)


def is_transverse_measure(track: Track, mu) -> bool:
    w = as_vector(track, mu)
    return all(x >= 0 for x in w) and check_switch_conditions(track, w)


# --------------------------------------------------------------------------
# vertex cycles: double description
# --------------------------------------------------------------------------

def _primitive(v: list[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def extreme_rays(equations: Sequence[Sequence[int]], n: int,
                 max_rays: int = 200_000) -> list[tuple[int, ...]]:
    r"""
    Extreme rays of the pointed cone ``{x >= 0, E x = 0}`` by the double
    description method, as primitive integer vectors in lexicographic order.

    The orthant generators are cut by one hyperplane at a time.  Two rays on
    opposite sides of the hyperplane are combined iff they are adjacent,
    tested combinatorially: no third ray vanishes on all coordinates where
    both vanish.
    """
    rays: list[tuple[int, ...]] = [tuple(int(i == j) for j in range(n)) for i in range(n)]

    def zeros(r):
        z = 0
        for i, x in enumerate(r):
            if x == 0:
                z |= 1 << i
        return z

    for eq in equations:
        eq = [int(c) for c in eq]
        vals = [sum(c * x for c, x in zip(eq, r)) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        new = [rays[i] for i, v in enumerate(vals) if v == 0]
        zs = [zeros(r) for r in rays]
        for i in pos:
            for j in neg:
                common = zs[i] & zs[j]
                adjacent = True
                for k in range(len(rays)):
                    if k != i and k != j and (zs[k] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                comb = [vals[i] * b - vals[j] * a for a, b in zip(rays[i], rays[j])]
                new.append(_primitive(comb))
                if len(new) > max_rays:
                    raise EnumerationBudgetExceeded(f"more than {max_rays} rays")
        rays = sorted(set(new))
    return sorted(rays)


def vertex_cycles(track: Track, max_rays: int = 200_000) -> list[tuple[int, ...]]:
    r"""
    Vertex cycles: the primitive integral generators of the extreme rays of
    ``V(tau)``, in lexicographic order of their weight vectors.
    """
    return extreme_rays(track.switch_matrix, track.num_branches, max_rays)


def extreme_rays_by_support(equations: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    r"""
    Brute-force extreme rays of ``{x >= 0, E x = 0}``: a ray is extreme iff
    the columns on its support have a one-dimensional kernel spanned by a
    vector positive on the support.  Exponential in ``n``; meant as an
    independent check of :func:`extreme_rays` for small tracks.
    """
    out = set()
    eqs = [[Fraction(c) for c in row] for row in equations]
    for mask in range(1, 1 << n):
        cols = [i for i in range(n) if mask >> i & 1]
        kern = _kernel([[row[c] for c in cols] for row in eqs], len(cols))
        if len(kern) != 1:
            continue
        v = kern[0]
        if all(x > 0 for x in v) or all(x < 0 for x in v):
            full = [Fraction(0)] * n
            for c, x in zip(cols, v):
                full[c] = abs(x)
            den = 1
            for x in full:
                den = den * x.denominator // gcd(den, x.denominator)
            out.add(_primitive([int(x * den) for x in full]))
    return sorted(out)


def _kernel(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Basis of the right kernel by exact Gauss-Jordan elimination."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f]
        basis.append(v)
    return basis


def rank(rows: Sequence[Sequence], n: int) -> int:
    return n - len(_kernel([[Fraction(x) for x in r] for r in rows], n))


# --------------------------------------------------------------------------
# recurrence
# --------------------------------------------------------------------------

def positive_transverse_measure(track: Track) -> list[Fraction] | None:
    """A transverse measure with every weight ``>= 1``, or ``None``."""
    n = track.num_branches
    return lp.feasible_point(n, a_eq=track.switch_matrix, b_eq=[0] * track.num_switches, lower=1)


def is_recurrent(track: Track, method: str = "lp") -> bool:
    r"""
    Whether the track carries a transverse measure positive on every branch.

    ``method="lp"`` solves the exact feasibility problem ``{switch
    conditions, weights >= 1}``; ``method="cycles"`` checks that the sum of
    all vertex cycles is positive on every branch.
    """
    if method == "lp":
        return positive_transverse_measure(track) is not None
    if method == "cycles":
        total = [0] * track.num_branches
        for v in vertex_cycles(track):
            total = [a + b for a, b in zip(total, v)]
        return all(x > 0 for x in total)
    raise ValueError(f"unknown method {method!r}")


def side_weights(track: Track, nu) -> list[tuple[Fraction, ...]]:
    r"""
    Side weights of every trigon: a side weighs the sum of the weights of
    the branches along it, counted with multiplicity.
    """
    w = as_vector(track, nu)
    idx = track.index
    out = []
    for reg in track.regions:
        if reg.is_trigon:
            out.append(tuple(sum((w[idx[b]] for b in side), Fraction(0)) for side in reg.sides))
    return out


def tangential_constraints(track: Track) -> list[list[int]]:
    r"""
    Rows ``r`` with ``r . nu <= 0`` encoding the triangle inequalities
    ``w(c_i) <= w(c_{i+1}) + w(c_{i+2})`` for the sides of every trigon.
    """
    idx = track.index
    rows = []
    for reg in track.regions:
        if not reg.is_trigon:
            continue
        for i in range(3):
            row = [0] * track.num_branches
            for b in reg.sides[i]:
                row[idx[b]] += 1
            for b in reg.sides[(i + 1) % 3] + reg.sides[(i + 2) % 3]:
                row[idx[b]] -= 1
            rows.append(row)
    return rows


def is_tangential_measure(track: Track, nu) -> bool:
    w = as_vector(track, nu)
    if any(x < 0 for x in w):
        return False
    return all(a <= b + c and b <= a + c and c <= a + b for a, b, c in side_weights(track, w))


def positive_tangential_measure(track: Track) -> list[Fraction] | None:
    rows = tangential_constraints(track)
    return lp.feasible_point(track.num_branches, a_ub=rows, b_ub=[0] * len(rows), lower=1)


def is_transversely_recurrent(track: Track) -> bool:
    """Whether the track admits a tangential measure positive on every branch."""
    return positive_tangential_measure(track) is not None


def is_complete(track: Track) -> bool:
    return is_recurrent(track) and is_transversely_recurrent(track)


# --------------------------------------------------------------------------
# pairing and normalisation
# --------------------------------------------------------------------------

def pairing(mu, nu) -> Fraction:
    """Intersection pairing ``sum_b mu(b) nu(b)``."""
    mu, nu = list(mu), list(nu)
    if len(mu) != len(nu):
        raise ValueError(f"index mismatch: {len(mu)} vs {len(nu)}")
    return sum((Fraction(a) * Fraction(b) for a, b in zip(mu, nu)), Fraction(0))


def max_large(track: Track, mu) -> Fraction:
    w = as_vector(track, mu)
    large = track.large_branches()
    if not large:
        raise DegenerateMeasure("track has no large branch")
    return max(w[track.index[b]] for b in large)


def normalize_large(track: Track, mu) -> tuple[list[Fraction], Fraction]:
    r"""
    Scale ``mu`` so that its maximal weight on a large branch is one.

    Returns ``(normalized, scale)``.  On a complete track the maximum over
    all branches is attained on a large branch; this is asserted.
    """
    w = as_vector(track, mu)
    if not check_switch_conditions(track, w):
        raise DegenerateMeasure("weights violate the switch conditions")
    if all(x == 0 for x in w):
        raise DegenerateMeasure("zero measure")
    scale = max_large(track, w)
    if scale <= 0:
        raise DegenerateMeasure("measure vanishes on every large branch")
    if max(w) != scale:
        raise AssertionError("maximal weight is not attained on a large branch")
    return [x / scale for x in w], scale


def random_carried_measure(track: Track, rng: random.Random,
                           cycles: Sequence[Sequence[int]] | None = None,
                           max_coeff: int = 50) -> list[Fraction]:
    r"""
    Random rational point of ``V(tau)``: a nonnegative combination of the
    vertex cycles with random rational coefficients.
    """
    cycles = vertex_cycles(track) if cycles is None else cycles
    out = [Fraction(0)] * track.num_branches
    for c in cycles:
        coeff = Fraction(rng.randint(0, max_coeff), rng.randint(1, max_coeff))
        out = [a + coeff * b for a, b in zip(out, c)]
    if all(x == 0 for x in out):
        out = [Fraction(x) for x in cycles[0]]
    return out
