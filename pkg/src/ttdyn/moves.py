r"""
Shifts and splits of train tracks and their carrying matrices.

Split convention.  Let ``e`` be a large branch with end switches ``v1`` and
``v2`` and write ``L1, R1`` (``L2, R2``) for the small left / small right
half-branches at ``v1`` (``v2``).  ``L1`` and ``R2`` lie on the same side of
``e``, as do ``R1`` and ``L2``.  A *right* split has winners ``L1, L2`` and
losers ``R1, R2``; a *left* split has winners ``R1, R2`` and losers ``L1,
L2``.  The pair ``{L1, L2}`` does not depend on how ``e`` is oriented.  After
the split the branch number ``e`` names the diagonal.

All carrying matrices act on column vectors of branch weights indexed by the
sorted branch numbers and map weights on the new track to weights on the old
one: ``mu_old = C @ mu_new``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .track import LARGE, LEFT, RIGHT, BranchClass, Track, TrackError


class InvalidMove(TrackError):
    pass


class InvalidMeasure(TrackError):
    pass


class SplitDirection(str, Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def opposite(self) -> "SplitDirection":
        return SplitDirection.LEFT if self is SplitDirection.RIGHT else SplitDirection.RIGHT


R = SplitDirection.RIGHT
L = SplitDirection.LEFT


@dataclass(frozen=True)
class MoveRecord:
    kind: str
    locations: tuple[int, ...]
    directions: tuple[str, ...] = ()
    bijection: Mapping[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "locations": list(self.locations),
            "directions": list(self.directions),
            "bijection": {str(k): v for k, v in sorted(self.bijection.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MoveRecord":
        return cls(d["kind"], tuple(d["locations"]), tuple(d["directions"]),
                   {int(k): int(v) for k, v in d["bijection"].items()})


def identity_matrix(track: Track) -> np.ndarray:
    return np.eye(track.num_branches, dtype=object) * 1


def _int_matrix(n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=object)
    for i in range(n):
        m[i, i] = 1
    return m


def matrix_to_csv(matrix: np.ndarray) -> str:
    return "\n".join(",".join(str(int(x)) for x in row) for row in matrix) + "\n"


# --------------------------------------------------------------------------
# shifts
# --------------------------------------------------------------------------

def shift_data(track: Track, branch: int):
    r"""
    Locate the switches of a shift along the mixed branch ``branch``.

    Returns ``(p, q, m_at_p, m_at_q)`` where ``p`` is the switch at which the
    branch is large and ``q`` the switch at which it is small.
    """
    if track.branch_classes.get(branch) is not BranchClass.MIXED:
        raise InvalidMove(f"branch {branch} is not mixed")
    h0, h1 = (branch, 0), (branch, 1)
    if track.is_large_half(h0):
        hp, hq = h0, h1
    else:
        hp, hq = h1, h0
    p, q = track.slot_of[hp][0], track.slot_of[hq][0]
    if p == q:
        raise InvalidMove(f"mixed branch {branch} is a loop at one switch; no shift")
    return p, q, hp, hq


def shift(track: Track, mixed_branch: int) -> Track:
    r"""
    Shift along a mixed branch.

    With ``m`` large at ``P`` (small half-branches ``x_l, x_r``) and small at
    ``Q`` (large ``z``, other small ``w``), the three branches leaving the
    fan in left-to-right order are regrouped so that ``w`` merges with the
    adjacent branch of ``P``.  Branch numbers are kept; every branch keeps its
    class.  A shift is an involution.
    """
    p, q, hp, hq = shift_data(track, mixed_branch)
    sw = [list(s) for s in track.switches]
    z = sw[q][LARGE]
    xl, xr = sw[p][LEFT], sw[p][RIGHT]
    if sw[q][RIGHT] == hq:
        w = sw[q][LEFT]
        # order w | x_l x_r  ->  (w x_l) | x_r
        sw[q] = [z, hq, xr]
        sw[p] = [hp, w, xl]
    else:
        w = sw[q][RIGHT]
        # order x_l x_r | w  ->  x_l | (x_r w)
        sw[q] = [z, xl, hq]
        sw[p] = [hp, xr, w]
    return Track(track.surface, tuple(tuple(s) for s in sw))


def shift_matrix(track: Track, mixed_branch: int) -> np.ndarray:
    r"""
    Integral unimodular matrix ``S`` with ``mu_old = S @ mu_new`` on measures
    satisfying the switch conditions, for ``new = shift(old, m)``.

    Every weight except that of ``m`` is unchanged; the old weight of ``m`` is
    expressed through the new switch equation at ``P`` so that ``S`` differs
    from the identity only in row ``m`` and has determinant one.
    """
    p, q, hp, hq = shift_data(track, mixed_branch)
    idx = track.index
    sw = track.switches
    xl, xr = sw[p][LEFT][0], sw[p][RIGHT][0]
    m = mixed_branch
    S = _int_matrix(track.num_branches)
    # old m = x_l + x_r; rewrite with the new equation at P
    if sw[q][RIGHT] == hq:
        w = sw[q][LEFT][0]
        # new P: m' = w + x_l  => old m = x_l + x_r = m' - w + x_r
        terms = [(m, 1), (w, -1), (xr, 1)]
    else:
        w = sw[q][RIGHT][0]
        # new P: m' = x_r + w  => old m = x_l + m' - w
        terms = [(m, 1), (w, -1), (xl, 1)]
    S[idx[m], idx[m]] = 0
    for b, c in terms:
        S[idx[m], idx[b]] += c
    return S


# --------------------------------------------------------------------------
# splits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitLocal:
    v1: int
    v2: int
    L1: tuple[int, int]
    R1: tuple[int, int]
    L2: tuple[int, int]
    R2: tuple[int, int]

    def winners(self, d: SplitDirection):
        return (self.L1, self.L2) if d is R else (self.R1, self.R2)

    def losers(self, d: SplitDirection):
        return (self.R1, self.R2) if d is R else (self.L1, self.L2)


def split_local(track: Track, e: int) -> SplitLocal:
    if track.branch_classes.get(e) is not BranchClass.LARGE:
        raise InvalidMove(f"branch {e} is not large")
    (v1, _), (v2, _) = track.endpoints(e)
    s1, s2 = track.switches[v1], track.switches[v2]
    return SplitLocal(v1, v2, s1[LEFT], s1[RIGHT], s2[LEFT], s2[RIGHT])


def _split_track(track: Track, e: int, d: SplitDirection) -> Track:
    loc = split_local(track, e)
    sw = [list(s) for s in track.switches]
    a, b = (e, 0), (e, 1)
    # the diagonal keeps number e; end 0 sits at v1, end 1 at v2
    if d is R:
        sw[loc.v1] = [loc.L1, a, loc.R2]
        sw[loc.v2] = [loc.L2, b, loc.R1]
    else:
        sw[loc.v1] = [loc.R1, loc.L2, a]
        sw[loc.v2] = [loc.R2, loc.L1, b]
    return Track(track.surface, tuple(tuple(s) for s in sw))


def split_matrix(track: Track, e: int, d: SplitDirection) -> np.ndarray:
    r"""
    Carrying matrix of a single split: the identity plus, in row ``e``, one
    unit for each loser half-branch.  The old weight of ``e`` is the weight of
    the diagonal plus the weights of the two losers.
    """
    loc = split_local(track, e)
    C = _int_matrix(track.num_branches)
    for h in loc.losers(d):
        C[track.index[e], track.index[h[0]]] += 1
    return C


def split(track: Track, large_branch: int, dir: SplitDirection):
    """Split at a large branch. Returns ``(new_track, carry_matrix, record)``."""
    dir = SplitDirection(dir)
    C = split_matrix(track, large_branch, dir)
    new = _split_track(track, large_branch, dir)
    rec = MoveRecord("split", (large_branch,), (dir.value,),
                     {b: b for b in track.branches})
    return new, C, rec


def unsplit(track: Track, diagonal_branch: int, dir: SplitDirection) -> Track:
    r"""
    Inverse of :func:`split`.

    A right split leaves the diagonal in the small-left slot at both of its
    (distinct) end switches, a left split in the small-right slot.
    """
    dir = SplitDirection(dir)
    e = diagonal_branch
    if e not in track.index:
        raise InvalidMove(f"no branch {e}")
    (s1, k1), (s2, k2) = track.endpoints(e)
    slot = LEFT if dir is R else RIGHT
    if s1 == s2 or k1 != slot or k2 != slot:
        raise InvalidMove(f"branch {e} is not the diagonal of a {dir.name.lower()} split")
    sw = [list(x) for x in track.switches]
    A, B = sw[s1], sw[s2]
    a, b = (e, 0), (e, 1)
    if dir is R:
        # s: [L1, e, R2], t: [L2, e, R1]
        L1, R2 = A[LARGE], A[RIGHT]
        L2, R1 = B[LARGE], B[RIGHT]
    else:
        # s: [R1, L2, e], t: [R2, L1, e]
        R1, L2 = A[LARGE], A[LEFT]
        R2, L1 = B[LARGE], B[LEFT]
    sw[s1] = [a, L1, R1]
    sw[s2] = [b, L2, R2]
    return Track(track.surface, tuple(tuple(x) for x in sw))


def full_split(track: Track, choices: Mapping[int, SplitDirection],
               order: Sequence[int] | None = None):
    r"""
    Split once at every large branch.

    ``choices`` must have exactly the large branches as keys.  Splits at
    distinct large branches commute; ``order`` only fixes the processing
    order.  Returns ``(new_track, carry_matrix, record)`` with the carry
    matrix the ordered product of the single-split matrices.
    """
    large = sorted(track.large_branches())
    keys = sorted(choices)
    if keys != large:
        raise InvalidMove(f"choices {keys} must cover exactly the large branches {large}")
    seq = list(order) if order is not None else large
    if sorted(seq) != large:
        raise InvalidMove("order must be a permutation of the large branches")
    C = _int_matrix(track.num_branches)
    cur = track
    for e in seq:
        d = SplitDirection(choices[e])
        cur, Ci, _ = split(cur, e, d)
        C = C.dot(Ci)
    rec = MoveRecord("full_split", tuple(large),
                     tuple(SplitDirection(choices[e]).value for e in large),
                     {b: b for b in track.branches})
    return cur, C, rec


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

def _weights(track: Track, mu) -> list[Fraction]:
    if isinstance(mu, Mapping):
        try:
            return [Fraction(mu[b]) for b in track.branches]
        except KeyError as exc:
            raise InvalidMeasure(f"missing weight for branch {exc}") from exc
    vals = [Fraction(x) for x in mu]
    if len(vals) != track.num_branches:
        raise InvalidMeasure(f"expected {track.num_branches} weights, got {len(vals)}")
    return vals


def compatible_direction(track: Track, mu, large_branch: int) -> SplitDirection:
    r"""
    Split direction selected by a transverse measure.

    Returns ``RIGHT`` iff the weight of ``L1`` is at least the weight of
    ``R2`` (winner against the loser on the same side at the opposite end),
    so that the diagonal of the right split gets weight ``mu(L1) - mu(R2)``.
    Ties go to ``RIGHT``.
    """
    from .cones import check_switch_conditions
    w = _weights(track, mu)
    if any(x < 0 for x in w) or not check_switch_conditions(track, w):
        raise InvalidMeasure("weights are not a transverse measure")
    loc = split_local(track, large_branch)
    idx = track.index
    return R if w[idx[loc.L1[0]]] >= w[idx[loc.R2[0]]] else L


def split_measure(track: Track, mu, large_branch: int, dir: SplitDirection) -> list[Fraction]:
    """Post-split weights ``C^{-1} mu`` (only the entry of ``e`` changes)."""
    w = _weights(track, mu)
    loc = split_local(track, large_branch)
    idx = track.index
    out = list(w)
    for h in loc.losers(SplitDirection(dir)):
        out[idx[large_branch]] -= w[idx[h[0]]]
    return out


def shift_measure(track: Track, mu, mixed_branch: int) -> list[Fraction]:
    """Weights on ``shift(track, m)`` of the measure ``mu`` on ``track``."""
    w = _weights(track, mu)
    p, q, hp, hq = shift_data(track, mixed_branch)
    sw, idx = track.switches, track.index
    if sw[q][RIGHT] == hq:
        pair = (sw[q][LEFT][0], sw[p][LEFT][0])
    else:
        pair = (sw[p][RIGHT][0], sw[q][RIGHT][0])
    out = list(w)
    out[idx[mixed_branch]] = w[idx[pair[0]]] + w[idx[pair[1]]]
    return out


def full_split_by_measure(track: Track, mu):
    """Directions chosen by ``mu`` at every large branch."""
    return {e: compatible_direction(track, mu, e) for e in track.large_branches()}


def tangential_pushforward(C: np.ndarray, nu) -> list:
    r"""
    Transport a tangential measure on the old track to the new one via the
    transpose ``C^t``; pairings are preserved: ``<mu', C^t nu> = <C mu', nu>``.
    """
    C = np.asarray(C, dtype=object)
    nu = list(nu)
    if C.shape != (len(nu), len(nu)):
        raise ValueError(f"dimension mismatch: matrix {C.shape}, vector {len(nu)}")
    return [sum((C[i, j] * nu[i] for i in range(len(nu))), Fraction(0)) for j in range(len(nu))]
