r"""
Seed tracks shipped as data, and closed splitting orbits through them.

The seeds are complete tracks in which every large branch lies on a twist
connector, an embedded closed trainpath of length two.  They were found by a
randomized search over fat graphs (see the decisions notes), not by the
standard-form construction from a framing, and every property is
re-checked by the test suite.

For ``(0, 5)`` the package also ships a few return words (see
:mod:`ttdyn.orbits`).  Closing them up gives closed orbits through the seed,
and :func:`orbit_seeds` lists the tracks along them.  Passing these to
:func:`~ttdyn.typegraph.build_type_graph` materializes a subgraph that
contains the closed orbits as cycles; breadth-first search from the seed
alone needs far larger budgets to reach comparable loops.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .orbits import ClosedOrbit, Return, close_orbit
from .track import LARGE, Surface, Track, UnsupportedSurface
from .typegraph import TypeGraph, build_type_graph

SUPPORTED = ((0, 5), (2, 0))


def _data(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text()


def seed_track(surface: Surface | tuple[int, int]) -> Track:
    """The shipped seed track of a supported surface."""
    g, m = (surface.genus, surface.punctures) if isinstance(surface, Surface) else surface
    if (g, m) not in SUPPORTED:
        raise UnsupportedSurface(f"no seed track for (g, m) = ({g}, {m}); supported: {list(SUPPORTED)}")
    return Track.from_json(_data(f"seed_{g}_{m}.json"))


def closed_trainpaths_of_length_two(track: Track) -> set[tuple[int, int]]:
    r"""
    Pairs ``(a, b)`` with ``a < b`` of distinct branches forming an embedded
    closed trainpath: ``a`` and ``b`` join the same two distinct switches and
    the path passes smoothly (between the large side and the small side)
    through both.
    """
    out = set()
    for a in track.branches:
        for b in track.branches:
            if a >= b:
                continue
            for ea in (0, 1):
                (sa0, ka0), (sa1, ka1) = track.slot_of[(a, ea)], track.slot_of[(a, 1 - ea)]
                for eb in (0, 1):
                    (sb0, kb0), (sb1, kb1) = track.slot_of[(b, eb)], track.slot_of[(b, 1 - eb)]
                    # a runs from sa0 to sa1, then b from sb0 = sa1 to sb1 = sa0
                    if sa0 == sa1 or sb0 != sa1 or sb1 != sa0:
                        continue
                    if (ka1 == LARGE) != (kb0 == LARGE) and (kb1 == LARGE) != (ka0 == LARGE):
                        out.add((a, b))
    return out


def twist_connectors(track: Track) -> dict[int, list[tuple[int, int]]]:
    """For every large branch, the closed trainpaths of length two through it."""
    paths = closed_trainpaths_of_length_two(track)
    return {e: sorted(p for p in paths if e in p) for e in track.large_branches()}


def in_standard_form(track: Track) -> bool:
    """Whether every large branch lies on a twist connector."""
    return all(twist_connectors(track).values())


@lru_cache(maxsize=None)
def shipped_returns(surface: tuple[int, int] = (0, 5)) -> tuple[Return, ...]:
    """Return words of the seed shipped for ``surface`` (empty if none)."""
    try:
        data = json.loads(_data(f"returns_{surface[0]}_{surface[1]}.json"))
    except FileNotFoundError:
        return ()
    return tuple(Return.from_dict(d) for d in data["returns"])


def closed_orbits(surface: tuple[int, int] = (0, 5), count: int | None = None) -> list[ClosedOrbit]:
    """Closed orbits through the seed from the first ``count`` shipped return words."""
    seed = seed_track(surface)
    rets = shipped_returns(surface)
    return [close_orbit(seed, r) for r in rets[:count]]


def orbit_seeds(surface: tuple[int, int] = (0, 5), count: int | None = None) -> list[Track]:
    """The seed followed by the tracks along the closed orbits, without repetitions."""
    out = [seed_track(surface).normalized()]
    seen = {out[0].code}
    for orbit in closed_orbits(surface, count):
        for t in orbit.tracks:
            if t.code not in seen:
                seen.add(t.code)
                out.append(t)
    return out


def orbit_graph(surface: tuple[int, int] = (0, 5), count: int | None = None,
                extra: int = 0, threads: int = 1) -> TypeGraph:
    r"""
    Type graph seeded with :func:`orbit_seeds`, with room for ``extra``
    nodes beyond the seeds.  With ``extra=0`` its nodes are exactly the
    classes along the closed orbits and the seed.
    """
    seeds = orbit_seeds(surface, count)
    return build_type_graph(seeds, len(seeds) + extra, threads=threads)
