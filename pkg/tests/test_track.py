import json
from collections import Counter

import pytest

from ttdyn import (BranchClass, Surface, Track, TrackError, UnsupportedSurface, canonical_code,
                   classify_branches, regions, seed_track, validate, validate_data)
from ttdyn.seeds import _data


def shuffled(track, rng, flip_ends=True):
    """Same numbered fat graph stored differently: switches permuted, ends renamed."""
    sw = list(track.switches)
    rng.shuffle(sw)
    flip = {b: rng.random() < 0.5 for b in track.branches} if flip_ends else {}
    return Track(track.surface, tuple(
        tuple((b, 1 - e if flip.get(b) else e) for b, e in s) for s in sw))


def classes_by_scan(data):
    """Second implementation: count large-slot half-branches per number in raw data."""
    large = Counter()
    seen = Counter()
    for s in data["switches"]:
        for slot in ("large", "small_left", "small_right"):
            b = s[slot]["branch"]
            seen[b] += 1
            if slot == "large":
                large[b] += 1
    names = {0: BranchClass.SMALL, 1: BranchClass.MIXED, 2: BranchClass.LARGE}
    return {b: names[large[b]] for b in seen}


# -- surfaces --------------------------------------------------------------

def test_surface_constants():
    s = Surface(0, 5)
    assert (s.dim, s.branches_expected, s.switches_expected, s.trigons_expected) == (4, 12, 8, 1)
    s = Surface(2, 0)
    assert (s.dim, s.branches_expected, s.switches_expected, s.trigons_expected) == (6, 18, 12, 4)
    assert (Surface(0, 5).entropy_target, Surface(0, 5).veech_bound) == (4, 20)


@pytest.mark.parametrize("g,m", [(0, 3), (0, 4), (1, 1), (1, 0)])
def test_exceptional_surfaces_rejected(g, m):
    with pytest.raises(UnsupportedSurface):
        Surface(g, m)


# -- validation ------------------------------------------------------------

@pytest.mark.parametrize("surface,b,s,trig,mono", [((0, 5), 12, 8, 1, 5), ((2, 0), 18, 12, 4, 0)])
def test_seed_validates_with_euler_counts(surface, b, s, trig, mono):
    rep = validate(seed_track(surface))
    assert rep.passed, rep.format()
    c = rep.counts
    assert (c["branches"], c["switches"], c["trigons"], c["monogons"]) == (b, s, trig, mono)
    assert c["cusps"] == s


def test_euler_identities(seed):
    surf = seed.surface
    b, s = seed.num_branches, seed.num_switches
    regs = regions(seed)
    assert 3 * s == 2 * b
    assert b - s == surf.dim
    assert sum(r.euler_index for r in regs) == surf.euler_characteristic
    assert sum(r.cusps for r in regs) == s
    assert all(r.is_trigon or (r.cusps == 1 and r.punctured) for r in regs)


def test_region_counts(seed05, seed20):
    r05 = regions(seed05)
    assert len(r05) == 6 and sum(r.cusps for r in r05) == 8
    r20 = regions(seed20)
    assert len(r20) == 4 and all(r.is_trigon for r in r20)


def test_bivalent_switch_fails_trivalence(seed05):
    data = seed05.to_dict()
    del data["switches"][0]["small_right"]
    rep = validate_data(data)
    assert not rep.passed
    assert "trivalence" in rep.failed


def test_duplicate_number_and_dangling_half_are_reported(seed05):
    data = seed05.to_dict()
    data["branches"].append({"num": 3})
    assert "unique_numbers" in validate_data(data).failed
    data = seed05.to_dict()
    data["switches"][0]["large"] = {"branch": 99, "end": 0}
    assert "half_branches" in validate_data(data).failed


def test_wrong_surface_fails_counts(seed05):
    data = seed05.to_dict()
    data["surface"] = {"g": 1, "m": 3}
    rep = validate_data(data)
    assert not rep.passed and "branch_count" in rep.failed


def test_validate_accepts_raw_data(seed05):
    assert validate(seed05.to_dict()).passed


def test_constructor_rejects_dangling():
    with pytest.raises(TrackError):
        Track(Surface(0, 5), (((1, 0), (2, 0), (3, 0)),))


# -- classification --------------------------------------------------------

def test_classification_matches_scan(seed):
    assert classify_branches(seed) == classes_by_scan(seed.to_dict())


def test_classification_counts(seed05, seed20):
    assert Counter(classify_branches(seed05).values()) == {
        BranchClass.LARGE: 1, BranchClass.MIXED: 6, BranchClass.SMALL: 5}
    assert Counter(classify_branches(seed20).values())[BranchClass.LARGE] == 2


def test_large_count_is_switch_pairs(seed):
    pairs = sum(1 for s in seed.switches for t in seed.switches
                if s is not t and s[0][0] == t[0][0]) // 2
    assert pairs == len(seed.large_branches())


# -- canonical codes -------------------------------------------------------

def test_reversed_storage_same_code(seed):
    rev = Track(seed.surface, tuple(reversed(seed.switches)))
    assert canonical_code(rev) == canonical_code(seed)


def test_swapped_numbers_change_code(seed05):
    swapped = seed05.relabel({b: {1: 5, 5: 1}.get(b, b) for b in seed05.branches})
    assert canonical_code(swapped) != canonical_code(seed05)


def test_code_invariant_under_storage_shuffles(seed05, rng):
    codes = {canonical_code(shuffled(seed05, rng)) for _ in range(1000)}
    assert codes == {canonical_code(seed05)}


def test_normalized_keeps_code(seed, rng):
    t = shuffled(seed, rng)
    assert t.normalized().code == seed.code
    assert t.normalized() == seed.normalized()


# -- serialization ---------------------------------------------------------

def test_json_round_trip_is_bit_exact(seed):
    text = seed.to_json()
    assert Track.from_json(text).to_json() == text


@pytest.mark.parametrize("name", ["seed_0_5.json", "seed_2_0.json"])
def test_shipped_files_round_trip(name):
    text = _data(name)
    assert Track.from_json(text).to_json() + "\n" == text


def test_bad_json_raises_track_error():
    with pytest.raises(TrackError):
        Track.from_json("{not json")
    with pytest.raises(TrackError):
        Track.from_json(json.dumps({"surface": {"g": 0, "m": 5}}))


# -- seeds -----------------------------------------------------------------

def test_unsupported_seed():
    with pytest.raises(UnsupportedSurface):
        seed_track((0, 3))
    with pytest.raises(UnsupportedSurface):
        seed_track((1, 2))
