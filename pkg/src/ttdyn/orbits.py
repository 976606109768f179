r"""
Closed splitting orbits.

Full splits commute with renumbering the branches, though not with shifts.
Suppose a word of full splits leads from a track ``T`` to a shift of
``phi(T)``, where ``phi(T)`` is ``T`` with its branches renumbered by a
permutation ``phi``.  Continuing from ``phi(T)`` itself with the word's
choices renumbered by ``phi``, then from ``phi**2(T)``, and so on, returns
to the numbered class of ``T`` after ``order(phi)`` repetitions.  The result
is a closed orbit of the subshift through the class of ``T``.

Such orbits are far longer than breadth-first materialization reaches.
Their tracks can be passed to :func:`~ttdyn.typegraph.build_type_graph` as
seeds; every node stores the member of its class by which it was reached
(the seed itself for seeds), so the orbit appears as a cycle of the graph.

Words are sequences of choice labels (see
:func:`~ttdyn.typegraph.choice_label`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from math import lcm
from typing import Sequence

import numpy as np

from . import cones
from .moves import full_split
from .track import Track
from .typegraph import (_unit, choice_label, choice_vectors, is_tight_matrix, parse_choice_label,
                        shift_class, type_code, type_isomorphism)


class OrbitError(RuntimeError):
    pass


@lru_cache(maxsize=65536)
def _step(track: Track, label: str) -> tuple[Track, np.ndarray] | None:
    new, C, _ = full_split(track, parse_choice_label(label))
    if not cones.is_recurrent(new):
        return None
    return new.normalized(), C


def step(track: Track, label: str) -> tuple[Track, np.ndarray]:
    """The full split of ``track`` selected by ``label`` and its matrix; it must be recurrent."""
    out = _step(track, label)
    if out is None:
        raise OrbitError(f"full split {label} is not recurrent")
    return out


def options(track: Track) -> list[str]:
    """Labels of the full splits of ``track`` with recurrent result."""
    return [lab for lab in (choice_label(c) for c in choice_vectors(track))
            if _step(track, lab) is not None]


def replay(track: Track, labels: Sequence[str]) -> tuple[list[Track], np.ndarray]:
    """Tracks visited along ``labels`` (starting with ``track`` normalized) and the matrix product."""
    cur = track.normalized()
    path = [cur]
    M = _unit(track.num_branches)
    for lab in labels:
        cur, C = step(cur, lab)
        M = M.dot(C)
        path.append(cur)
    return path, M


def transport(label: str, perm: dict[int, int]) -> str:
    """Rename the large branches in a choice label by ``perm``."""
    return choice_label({perm[e]: d for e, d in parse_choice_label(label).items()})


def compose(p: dict[int, int], q: dict[int, int]) -> dict[int, int]:
    """The permutation ``x -> p[q[x]]``."""
    return {x: p[q[x]] for x in q}


def permutation_order(perm: dict[int, int]) -> int:
    seen: set[int] = set()
    out = 1
    for x in perm:
        if x in seen:
            continue
        n, y = 0, x
        while y not in seen:
            seen.add(y)
            y = perm[y]
            n += 1
        out = lcm(out, n)
    return out


@dataclass(frozen=True)
class Return:
    r"""
    A word ``labels`` leading from a track ``T`` to a shift of ``T``
    renumbered by ``perm`` (branch ``x`` of ``T`` becomes ``perm[x]``).
    """

    labels: tuple[str, ...]
    perm: tuple[tuple[int, int], ...]

    @property
    def order(self) -> int:
        return permutation_order(dict(self.perm))

    @property
    def closed_length(self) -> int:
        return len(self.labels) * self.order

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "perm": [list(p) for p in self.perm]}

    @classmethod
    def from_dict(cls, d: dict) -> "Return":
        return cls(tuple(d["labels"]), tuple((int(a), int(b)) for a, b in d["perm"]))


@dataclass(frozen=True)
class ClosedOrbit:
    r"""
    A closed orbit through the numbered class of ``tracks[0]``:
    ``labels[k]`` is the full split applied to ``tracks[k]``.  The full
    split of ``tracks[k]`` is ``tracks[k+1]`` itself, or a shift of it where
    a repetition of the return word ends.
    """

    tracks: tuple[Track, ...]
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def class_codes(self) -> list[bytes]:
        return [shift_class(t).code for t in self.tracks]


def find_returns(track: Track, rng: random.Random, walks: int, max_steps: int) -> list[Return]:
    r"""
    Random walks of full splits from ``track``.  A walk stops at the first
    track that is a shift of a renumbered copy of ``track`` and is reached
    by a tight word (every measure carried at the end fills ``track``).
    Returns whose walk meets some numbered class twice are discarded, since
    they cannot be embedded cycles of the type graph.
    """
    start = track.normalized()
    code0 = type_code(start)[0]
    out = []
    for _ in range(walks):
        cur = start
        M = _unit(track.num_branches)
        labels: list[str] = []
        seen = {shift_class(start).code}
        for _ in range(max_steps):
            opts = options(cur)
            if not opts:
                break
            lab = rng.choice(opts)
            cur, C = step(cur, lab)
            M = M.dot(C)
            labels.append(lab)
            if type_code(cur)[0] == code0 and is_tight_matrix(M, cones.vertex_cycles(cur)):
                perm = type_isomorphism(start, cur)
                out.append(Return(tuple(labels), tuple(sorted(perm.items()))))
                break
            code = shift_class(cur).code
            if code in seen:
                break
            seen.add(code)
    return out


def close_orbit(track: Track, ret: Return) -> ClosedOrbit:
    r"""
    Close up a return.  Repetition ``k`` of the word starts at ``track``
    renumbered by ``perm**k`` with its labels renumbered alike; after
    ``order(perm)`` repetitions the numbered class of ``track`` is reached
    again.  Raises :class:`OrbitError` if some step is not recurrent or the
    orbit does not close (which would mean ``ret`` is not a return of
    ``track``).
    """
    start = track.normalized()
    perm = dict(ret.perm)
    power = {b: b for b in start.branches}
    tracks: list[Track] = []
    labels: list[str] = []
    for _ in range(ret.order):
        cur = start.relabel(power).normalized()
        for lab in ret.labels:
            lab = transport(lab, power)
            tracks.append(cur)
            labels.append(lab)
            cur, _ = step(cur, lab)
        power = compose(perm, power)
        if shift_class(cur).code != shift_class(start.relabel(power)).code:
            raise OrbitError("word does not return to a renumbered copy of the track")
    if shift_class(cur).code != shift_class(start).code:
        raise OrbitError("orbit does not close")
    return ClosedOrbit(tuple(tracks), tuple(labels))
