"""
Closed splitting orbits through the (0,5) seed, the graph they span, and the
dilatations and roof sums of its periodic loops.

    python demos/closed_orbits.py
"""

from ttdyn import enumerate_loops
from ttdyn.flow import counted_periods, loop_dilatation, loop_roof
from ttdyn.seeds import closed_orbits, orbit_graph
from ttdyn.typegraph import analyze_shift, largest_component


def main():
    for orbit in closed_orbits((0, 5)):
        print(f"closed orbit of {len(orbit)} full splits through the seed")

    g = orbit_graph((0, 5))
    comp = largest_component(g)
    print(f"\ngraph: {g.size} nodes, {len(g.edges)} edges; "
          f"largest component {comp.size} nodes, {analyze_shift(comp.adjacency)}")

    census = enumerate_loops(g, 64)
    print(f"\n{len(census.loops)} periodic loops up to length 64")
    flat = 0
    for loop in census.loops:
        d = loop_dilatation(g, loop)
        if d.period <= 1e-9:
            # loops around twist connectors and their combinations
            flat += 1
            continue
        roof = loop_roof(g, loop, 2 * len(loop))
        print(f"  length {len(loop):3d}  dilatation {d.lam:.10g}  log {d.period:.10f}  "
              f"roof sum {roof.total:.10f} +- {roof.radius:.1e}")
    print(f"  and {flat} loops of dilatation 1")

    counted, skipped = counted_periods(g, census.loops)
    print(f"\n{len(counted)} loops enter the counting function; {skipped} are powers or twists")


if __name__ == "__main__":
    main()
