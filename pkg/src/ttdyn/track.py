r"""
Combinatorial train tracks.

A maximal generic train track is stored as an oriented fat graph whose
vertices (switches) are trivalent with a fixed slot pattern: one half-branch
on the large side and two on the small side, ordered ``(left, right)`` by the
orientation of the surface.  Standing at a switch and looking from the large
half-branch towards the small side, ``left`` is on the left hand.  With this
convention the counterclockwise cyclic order of the three half-branches is
``(large, right, left)``.

A half-branch is referenced as ``(branch_number, end)`` with ``end`` in
``{0, 1}``.  Branch numbers are persistent labels carried along by moves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable

LARGE, LEFT, RIGHT = 0, 1, 2
SLOT_NAMES = ("large", "small_left", "small_right")

HalfBranch = tuple[int, int]
Switch = tuple[HalfBranch, HalfBranch, HalfBranch]


class TrackError(ValueError):
    """Raised for malformed track data or invalid operations on a track."""


class UnsupportedSurface(TrackError):
    pass


@dataclass(frozen=True, order=True)
class Surface:
    """Oriented surface of genus ``genus`` with ``punctures`` punctures."""

    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise TrackError("genus and punctures must be nonnegative")
        if 3 * self.genus - 3 + self.punctures < 2:
            raise UnsupportedSurface(
                f"surface ({self.genus},{self.punctures}) is exceptional: 3g-3+m < 2")

    @property
    def dim(self) -> int:
        """Dimension of the space of measured laminations, ``6g-6+2m``."""
        return 6 * self.genus - 6 + 2 * self.punctures

    @property
    def branches_expected(self) -> int:
        return 18 * self.genus - 18 + 6 * self.punctures

    @property
    def switches_expected(self) -> int:
        return 12 * self.genus - 12 + 4 * self.punctures

    @property
    def trigons_expected(self) -> int:
        return 4 * self.genus - 4 + self.punctures

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.punctures

    @property
    def entropy_target(self) -> int:
        """Growth rate ``6g-6+2m`` of periodic orbits meeting a large compact set."""
        return self.dim

    @property
    def veech_bound(self) -> int:
        """Upper bound ``(6g-6+2m)(6g-5+2m)`` for the growth of all periodic orbits."""
        return self.dim * (self.dim + 1)


class BranchClass(str, Enum):
    LARGE = "large"
    MIXED = "mixed"
    SMALL = "small"


@dataclass(frozen=True)
class Region:
    r"""
    Complementary region of a track.

    ``boundary`` lists the traversed half-branches ``(branch, end)`` in the
    order of the boundary walk (each entry is the half-branch the walk leaves
    a switch along).  ``sides`` groups the branch numbers of the boundary into
    the smooth arcs between consecutive cusps.
    """

    boundary: tuple[HalfBranch, ...]
    cusps: int
    punctured: bool
    sides: tuple[tuple[int, ...], ...]

    @property
    def euler_index(self) -> Fraction:
        return 1 - Fraction(self.cusps, 2) - int(self.punctured)

    @property
    def is_trigon(self) -> bool:
        return self.cusps == 3 and not self.punctured


@dataclass
class ValidationReport:
    checks: dict[str, bool] = field(default_factory=dict)
    messages: dict[str, str] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def record(self, name: str, ok: bool, message: str = "") -> bool:
        self.checks[name] = bool(ok)
        if message:
            self.messages[name] = message
        return ok

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def __bool__(self):
        return self.passed

    def format(self) -> str:
        lines = []
        for name, ok in self.checks.items():
            msg = "" if ok else self.messages.get(name, "")
            lines.append(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {msg}" if msg else ""))
        if self.counts:
            lines.append("counts: " + ", ".join(f"{k}={v}" for k, v in self.counts.items()))
        return "\n".join(lines)


@dataclass(frozen=True)
class Track:
    r"""
    Numbered train track as an oriented fat graph.

    ``switches`` is a tuple of triples ``(large, small_left, small_right)`` of
    half-branch references.  The constructor performs only the structural
    checks needed to make the object usable (every half-branch used exactly
    once); use :func:`validate` for the full report.

    EXAMPLES::

        >>> from ttdyn.seeds import seed_track
        >>> t = seed_track(Surface(0, 5))
        >>> t.num_branches, t.num_switches
        (12, 8)
    """

    surface: Surface
    switches: tuple[Switch, ...]

    def __post_init__(self):
        sw = tuple(tuple((int(b), int(e)) for b, e in s) for s in self.switches)
        object.__setattr__(self, "switches", sw)
        seen: dict[HalfBranch, tuple[int, int]] = {}
        for i, s in enumerate(sw):
            if len(s) != 3:
                raise TrackError(f"switch {i} is not trivalent ({len(s)} half-branches)")
            for k, h in enumerate(s):
                if h[1] not in (0, 1):
                    raise TrackError(f"half-branch {h} at switch {i}: end must be 0 or 1")
                if h in seen:
                    raise TrackError(f"half-branch {h} occupies two slots")
                seen[h] = (i, k)
        for (b, e) in seen:
            if (b, 1 - e) not in seen:
                raise TrackError(f"branch {b} has a dangling half-branch")

    # -- lookups ---------------------------------------------------------

    @cached_property
    def slot_of(self) -> dict[HalfBranch, tuple[int, int]]:
        """Map half-branch -> (switch index, slot)."""
        return {h: (i, k) for i, s in enumerate(self.switches) for k, h in enumerate(s)}

    @cached_property
    def branches(self) -> tuple[int, ...]:
        return tuple(sorted({b for s in self.switches for b, _ in s}))

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    @property
    def num_switches(self) -> int:
        return len(self.switches)

    @cached_property
    def index(self) -> dict[int, int]:
        """Position of each branch number in the sorted branch list."""
        return {b: i for i, b in enumerate(self.branches)}

    def half(self, switch: int, slot: int) -> HalfBranch:
        return self.switches[switch][slot]

    def endpoints(self, branch: int) -> tuple[tuple[int, int], tuple[int, int]]:
        return self.slot_of[(branch, 0)], self.slot_of[(branch, 1)]

    def is_large_half(self, h: HalfBranch) -> bool:
        return self.slot_of[h][1] == LARGE

    # -- branch classes --------------------------------------------------

    @cached_property
    def branch_classes(self) -> dict[int, BranchClass]:
        out = {}
        for b in self.branches:
            n = self.is_large_half((b, 0)) + self.is_large_half((b, 1))
            out[b] = (BranchClass.SMALL, BranchClass.MIXED, BranchClass.LARGE)[n]
        return out

    def large_branches(self) -> list[int]:
        return [b for b, c in self.branch_classes.items() if c is BranchClass.LARGE]

    def mixed_branches(self) -> list[int]:
        return [b for b, c in self.branch_classes.items() if c is BranchClass.MIXED]

    def small_branches(self) -> list[int]:
        return [b for b, c in self.branch_classes.items() if c is BranchClass.SMALL]

    # -- switch conditions ------------------------------------------------

    @cached_property
    def switch_matrix(self) -> list[list[int]]:
        r"""
        Integer rows ``large - left - right`` per switch, columns indexed by
        the sorted branch numbers.  A weight vector is a transverse measure
        iff it is nonnegative and annihilated by every row.
        """
        rows = []
        for s in self.switches:
            row = [0] * self.num_branches
            row[self.index[s[LARGE][0]]] += 1
            row[self.index[s[LEFT][0]]] -= 1
            row[self.index[s[RIGHT][0]]] -= 1
            rows.append(row)
        return rows

    # -- regions -----------------------------------------------------------

    def _ccw_next(self, h: HalfBranch) -> HalfBranch:
        i, k = self.slot_of[h]
        # ccw order (large, right, left)
        nxt = {LARGE: RIGHT, RIGHT: LEFT, LEFT: LARGE}[k]
        return self.switches[i][nxt]

    @cached_property
    def regions(self) -> tuple[Region, ...]:
        return tuple(_boundary_walks(self))

    # -- codes -------------------------------------------------------------

    @cached_property
    def code(self) -> bytes:
        r"""
        Canonical code of the numbered fat graph.

        Because every branch number occurs in exactly two slots, the sorted
        list of switch triples of branch numbers determines the pairing of
        half-branches, hence the numbered oriented fat graph.  It ignores
        switch order and the labelling of branch ends.
        """
        triples = sorted(tuple(b for b, _ in s) for s in self.switches)
        return ";".join(",".join(map(str, t)) for t in triples).encode()

    # -- transformations ---------------------------------------------------

    def relabel(self, mapping: dict[int, int]) -> "Track":
        """Return the track with branch numbers renamed through ``mapping``."""
        return Track(self.surface, tuple(
            tuple((mapping[b], e) for b, e in s) for s in self.switches))

    def normalized(self) -> "Track":
        r"""
        Return an equal-code track in a normal storage form: switches sorted
        by their branch-number triples and branch ends renamed so that end 0
        is the first occurrence in that order.
        """
        sw = sorted(self.switches, key=lambda s: tuple(b for b, _ in s))
        first: dict[int, int] = {}
        out = []
        for s in sw:
            row = []
            for b, e in s:
                if b not in first:
                    first[b] = e
                row.append((b, 0 if e == first[b] else 1))
            out.append(tuple(row))
        return Track(self.surface, tuple(out))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "surface": {"g": self.surface.genus, "m": self.surface.punctures},
            "branches": [{"num": b} for b in self.branches],
            "switches": [
                {name: {"branch": h[0], "end": h[1]} for name, h in zip(SLOT_NAMES, s)}
                for s in self.switches
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Track":
        try:
            surf = Surface(int(data["surface"]["g"]), int(data["surface"]["m"]))
            nums = [int(b["num"]) for b in data["branches"]]
            switches = tuple(
                tuple((int(s[name]["branch"]), int(s[name]["end"])) for name in SLOT_NAMES)
                for s in data["switches"])
        except (KeyError, TypeError) as exc:
            raise TrackError(f"malformed track data: {exc!r}") from exc
        if len(set(nums)) != len(nums):
            raise TrackError("duplicate branch number in branch list")
        t = cls(surf, switches)
        if sorted(nums) != list(t.branches):
            raise TrackError("branch list does not match the branches used by the switches")
        return t

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "Track":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TrackError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


def _boundary_walks(track: Track) -> Iterable[Region]:
    r"""
    Trace the complementary regions as the faces of the fat graph.

    A step leaves a switch along a half-branch ``h``, arrives at the other
    end ``h'`` and continues along the counterclockwise successor of ``h'``.
    The corner between ``h'`` and its successor is a cusp exactly when
    ``h'`` is the small right and the successor the small left half-branch.
    """
    seen: set[HalfBranch] = set()
    for start in sorted(track.slot_of):
        if start in seen:
            continue
        walk: list[HalfBranch] = []
        cusp_after: list[bool] = []
        h = start
        while h not in seen:
            seen.add(h)
            walk.append(h)
            arrive = (h[0], 1 - h[1])
            slot = track.slot_of[arrive][1]
            cusp_after.append(slot == RIGHT)
            h = track._ccw_next(arrive)
        if h != start:
            raise TrackError("boundary walk does not close up: malformed embedding")
        cusps = sum(cusp_after)
        sides: list[tuple[int, ...]] = []
        if cusps:
            # rotate so the walk starts right after a cusp
            k = cusp_after.index(True)
            order = list(range(k + 1, len(walk))) + list(range(k + 1))
            cur: list[int] = []
            for j in order:
                cur.append(walk[j][0])
                if cusp_after[j]:
                    sides.append(tuple(cur))
                    cur = []
        else:
            sides.append(tuple(b for b, _ in walk))
        yield Region(tuple(walk), cusps, cusps == 1, tuple(sides))


def classify_branches(track: Track) -> dict[int, BranchClass]:
    """Large / mixed / small class of every branch."""
    return dict(track.branch_classes)


def regions(track: Track) -> list[Region]:
    return list(track.regions)


def canonical_code(track: Track) -> bytes:
    return track.code


def is_connected(track: Track) -> bool:
    if not track.switches:
        return False
    adj: dict[int, set[int]] = {i: set() for i in range(track.num_switches)}
    for b in track.branches:
        (i, _), (j, _) = track.endpoints(b)
        adj[i].add(j)
        adj[j].add(i)
    stack, seen = [0], {0}
    while stack:
        i = stack.pop()
        for j in adj[i] - seen:
            seen.add(j)
            stack.append(j)
    return len(seen) == track.num_switches


def validate_data(data) -> ValidationReport:
    r"""
    Validate raw track data (the parsed JSON file format).  Malformed input
    such as a switch without three slots, a dangling or doubly used
    half-branch or a duplicate branch number yields a failed report naming
    the violated invariant instead of an exception.
    """
    rep = ValidationReport()
    try:
        Surface(int(data["surface"]["g"]), int(data["surface"]["m"]))
    except TrackError as exc:
        rep.record("surface", False, str(exc))
        return rep
    except (KeyError, TypeError, ValueError) as exc:
        rep.record("format", False, f"missing or bad surface: {exc!r}")
        return rep
    switches = data.get("switches") if isinstance(data, dict) else None
    if not isinstance(switches, list) or not isinstance(data.get("branches"), list):
        rep.record("format", False, "switches and branches must be lists")
        return rep
    short = [i for i, s in enumerate(switches)
             if not isinstance(s, dict) or any(not isinstance(s.get(k), dict) for k in SLOT_NAMES)
             or len(s) != 3]
    if not rep.record("trivalence", not short, f"switches {short} do not have exactly the slots {SLOT_NAMES}"):
        return rep
    rep.record("slot_pattern", True)
    try:
        halves = [(int(s[k]["branch"]), int(s[k]["end"])) for s in switches for k in SLOT_NAMES]
        nums = [int(b["num"]) for b in data["branches"]]
    except (KeyError, TypeError, ValueError) as exc:
        rep.record("format", False, f"bad half-branch reference: {exc!r}")
        return rep
    dup_nums = sorted({n for n in nums if nums.count(n) > 1})
    rep.record("unique_numbers", not dup_nums, f"duplicate branch numbers {dup_nums}")
    twice = sorted({h for h in halves if halves.count(h) > 1})
    dangling = sorted({b for b, e in halves if (b, 1 - e) not in halves})
    bad_end = sorted({h for h in halves if h[1] not in (0, 1)})
    rep.record("half_branches", not (twice or dangling or bad_end),
               f"used twice {twice}, dangling branches {dangling}, bad ends {bad_end}")
    if not rep.passed:
        return rep
    try:
        track = Track.from_dict(data)
    except TrackError as exc:
        rep.record("format", False, str(exc))
        return rep
    inner = validate(track)
    rep.checks.update(inner.checks)
    rep.messages.update(inner.messages)
    rep.counts.update(inner.counts)
    return rep


def validate(track: Track) -> ValidationReport:
    r"""
    Structural validation against the surface constants.

    Checks trivalence and the ``1+2`` slot pattern, that branch numbers are
    ``1..b``, connectivity, that every region is a trigon or a once-punctured
    monogon, and the Euler characteristic counts.  Raw data (a ``dict``) is
    passed to :func:`validate_data`.
    """
    if isinstance(track, dict):
        return validate_data(track)
    rep = ValidationReport()
    surf = track.surface
    b, s = track.num_branches, track.num_switches
    rep.counts.update(branches=b, switches=s)
    # trivalence and slot pattern are enforced by construction
    rep.record("trivalence", all(len(x) == 3 for x in track.switches))
    rep.record("slot_pattern", True)
    rep.record("branch_numbering", list(track.branches) == list(range(1, b + 1)),
               f"numbers {track.branches[:3]}... must be 1..{b}")
    rep.record("switch_count", 3 * s == 2 * b, f"3s={3 * s} vs 2b={2 * b}")
    rep.record("connected", is_connected(track))
    try:
        regs = track.regions
    except TrackError as exc:
        rep.record("region_shapes", False, str(exc))
        return rep
    trig = sum(1 for r in regs if r.cusps == 3)
    mono = sum(1 for r in regs if r.cusps == 1)
    bad = [r.cusps for r in regs if r.cusps not in (1, 3)]
    rep.counts.update(regions=len(regs), trigons=trig, monogons=mono,
                      cusps=sum(r.cusps for r in regs))
    rep.record("region_shapes", not bad, f"regions with cusp counts {bad}" if bad else "")
    rep.record("branch_count", b == surf.branches_expected,
               f"b={b}, expected {surf.branches_expected}")
    rep.record("switch_count_surface", s == surf.switches_expected,
               f"s={s}, expected {surf.switches_expected}")
    rep.record("trigons", trig == surf.trigons_expected,
               f"{trig} trigons, expected {surf.trigons_expected}")
    rep.record("punctured_monogons", mono == surf.punctures,
               f"{mono} monogons, expected {surf.punctures}")
    chi = s - b + len(regs) - mono
    rep.record("euler_characteristic", chi == surf.euler_characteristic,
               f"chi={chi}, expected {surf.euler_characteristic}")
    rep.record("cusp_total", sum(r.cusps for r in regs) == s)
    return rep
