"""
A walk around the (0,5) seed track: validation, branch classes, a split and
its carrying matrix, and the cone of transverse measures before and after.

    python demos/tour_of_a_seed.py
"""

from ttdyn import SplitDirection, cones, seed_track, split, unsplit, validate
from ttdyn.track import BranchClass


def main():
    seed = seed_track((0, 5))
    rep = validate(seed)
    print(rep.format())
    classes = seed.branch_classes
    for kind in BranchClass:
        print(f"{kind.name.lower():>6}: {sorted(b for b, c in classes.items() if c is kind)}")

    cycles = cones.vertex_cycles(seed)
    print(f"\n{len(cycles)} vertex cycles span the measure cone; the first is {cycles[0]}")

    e = seed.large_branches()[0]
    new, C, _ = split(seed, e, SplitDirection.RIGHT)
    print(f"\nright split at branch {e}:")
    print(C)
    print(f"recurrent after the split: {cones.is_recurrent(new)}")
    print(f"vertex cycles after the split: {len(cones.vertex_cycles(new))}")
    # every measure on the new track pushes forward to one on the seed
    image = [list(C.dot(v)) for v in cones.vertex_cycles(new)]
    print(f"their images satisfy the seed's switch conditions: "
          f"{all(cones.check_switch_conditions(seed, v) for v in image)}")
    print(f"unsplit restores the seed: {unsplit(new, e, SplitDirection.RIGHT).code == seed.code}")


if __name__ == "__main__":
    main()
