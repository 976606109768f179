r"""
Command line interface.

Subcommands: ``validate``, ``graph``, ``census``, ``measure`` and ``roof``.
Every artifact written embeds the run configuration and the package
version.  Exit codes: 0 success, 1 domain failure (a check failed), 2 usage
or input/output error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, cones
from .flow import (PERIOD_TOL, complete_range, count_report, enumerate_loops, loop_dilatation,
                   loop_roof)
from .markov import (MarkovMeasure, SupportMismatch, avoidance_probability, cylinder_mass,
                     random_rows, shift_entropy, stationary_residual, uniform_rows)
from .seeds import orbit_seeds, seed_track
from .track import Surface, Track, TrackError, validate_data
from .typegraph import (TypeGraph, analyze_shift, build_type_graph, find_tight_words,
                        largest_component)

log = logging.getLogger("ttdyn")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    surface: tuple[int, int] = (0, 5)
    seed: str = "builtin"
    budget: int = 200
    orbits: int = 0
    max_len: int = 20
    rng_seed: int = 0
    out: str = "."
    threads: int = 1
    depth: int = 40
    tolerances: dict = field(default_factory=lambda: {"row_sum": 1e-12, "residual": 1e-10})

    def validate(self) -> None:
        if self.budget < 1:
            raise UsageError("--budget must be positive")
        if self.max_len < 0:
            raise UsageError("--max-len must be nonnegative")
        if self.threads < 1:
            raise UsageError("--threads must be positive")
        if self.orbits < 0:
            raise UsageError("--orbits must be nonnegative")
        if self.depth < 1:
            raise UsageError("--depth must be positive")

    def echo(self) -> dict:
        d = asdict(self)
        d["surface"] = list(self.surface)
        return d


def _header(config: RunConfig, command: str) -> dict:
    return {"tool": "ttdyn", "version": __version__, "command": command, "config": config.echo()}


def _csv_header(config: RunConfig, command: str) -> str:
    return f"# {json.dumps(_header(config, command), sort_keys=True)}\n"


def _surface(text: str) -> tuple[int, int]:
    try:
        g, m = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"surface must be 'g,m', got {text!r}")
    return g, m


def _load_seed(config: RunConfig) -> Track:
    if config.seed == "builtin":
        return seed_track(config.surface)
    try:
        return Track.from_json(Path(config.seed).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read seed: {exc}")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_graph(path: Path) -> TypeGraph:
    try:
        return TypeGraph.from_json(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}")
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot parse graph {path}: {exc}")


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_validate(path: str) -> int:
    if path.startswith("builtin:"):
        try:
            data = seed_track(_surface(path.split(":", 1)[1])).to_dict()
        except (argparse.ArgumentTypeError, TrackError) as exc:
            raise UsageError(str(exc))
    else:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"parse error in {path}: {exc}")
    rep = validate_data(data)
    print(rep.format())
    if rep.passed:
        t = Track.from_dict(data)
        print(f"recurrent: {cones.is_recurrent(t)}")
        print(f"transversely recurrent: {cones.is_transversely_recurrent(t)}")
    print("PASS" if rep.passed else "FAIL: " + ", ".join(rep.failed))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_graph(config: RunConfig) -> int:
    seed = _load_seed(config)
    seeds = orbit_seeds(config.surface, config.orbits) if config.orbits else [seed]
    if config.orbits and config.seed != "builtin":
        raise UsageError("--orbits uses the builtin seed; do not combine it with --seed")
    if config.budget < len(seeds):
        log.warning("budget %d is smaller than the %d seed tracks", config.budget, len(seeds))
    g = build_type_graph(seeds, config.budget, threads=config.threads)
    out = _out_dir(config)
    data = g.to_dict()
    data["run"] = _header(config, "graph")
    _write(out / "graph.json", json.dumps(data, sort_keys=True, separators=(",", ":")))
    _write(out / "graph.dot", f"// {json.dumps(_header(config, 'graph'), sort_keys=True)}\n" + g.to_dot())
    full = analyze_shift(g.adjacency)
    summary = {"nodes": g.size, "edges": len(g.edges), "dropped_edges": g.dropped_edges,
               "frontier_edges": g.frontier_edges, "truncated": g.truncated,
               "scope": "on materialized subgraph", "analysis": asdict(full)}
    try:
        comp = largest_component(g)
        summary["largest_component"] = {"nodes": comp.size, "edges": len(comp.edges),
                                        "analysis": asdict(analyze_shift(comp.adjacency))}
    except ValueError:
        summary["largest_component"] = None
    summary["run"] = _header(config, "graph")
    _write(out / "graph_summary.json", json.dumps(summary, indent=1, sort_keys=True))
    print(f"nodes {g.size}, edges {len(g.edges)}, dropped (non-recurrent) {g.dropped_edges}, "
          f"frontier {g.frontier_edges}{', truncated' if g.truncated else ''}")
    print(f"whole graph: {_describe(full)}")
    if summary["largest_component"]:
        lc = summary["largest_component"]
        print(f"largest strongly connected component ({lc['nodes']} nodes): "
              f"{_describe(analyze_shift(comp.adjacency))}")
    return EXIT_OK


def _describe(a) -> str:
    s = f"transitive={a.transitive}, period={a.period}, mixing={a.mixing}"
    return s + (f", witness={a.witness}" if a.witness else ", no witness")


def _graph_path(config: RunConfig, graph: str | None) -> Path:
    return Path(graph) if graph else Path(config.out) / "graph.json"


def cmd_census(config: RunConfig, graph: str | None = None, r_points: int = 12) -> int:
    g = _load_graph(_graph_path(config, graph))
    census = enumerate_loops(g, config.max_len)
    rows = []
    for loop in census.loops:
        d = loop_dilatation(g, loop)
        word = " ".join(f"{n}:{c}" for n, c in zip(loop.nodes, loop.choices))
        rows.append((word, len(loop), d.lam, d.period, loop.primitive, d.primitive))
    out = _out_dir(config)
    lines = [_csv_header(config, "census").rstrip("\n"),
             "# symbolic loop counts on the materialized subgraph",
             "word,length,dilatation,period,primitive_word,primitive_matrix"]
    for w, n, lam, per, pw, pm in rows:
        lines.append(f"{w},{n},{lam!r},{per!r},{int(pw)},{int(pm)}")
    _write(out / "census.csv", "\n".join(lines) + "\n")
    dim = Surface(*config.surface).dim
    # primitive words of dilatation above one; powers and twist loops are left out
    counted = [(n, per) for _, n, _, per, pw, _ in rows if pw and per > PERIOD_TOL]
    if counted:
        lo, hi = complete_range([n for n, _ in counted], [p for _, p in counted], config.max_len)
        grid = np.linspace(lo, hi, r_points) if hi > lo else np.array([lo])
    else:
        grid = np.array([1.0])
    rep = count_report([p for _, p in counted], [float(r) for r in grid], dim)
    _write(out / "counts.csv", _csv_header(config, "census") + rep.to_csv())
    print(f"loops {len(census.loops)} (primitive {census.primitive}, imprimitive {census.imprimitive})"
          f"{', partial' if census.partial else ''}")
    print(f"counted {len(counted)} loops (primitive, dilatation > 1); "
          f"r-grid [{grid[0]:.4g}, {grid[-1]:.4g}]")
    print(f"reference lines: target {rep.target}, bound {rep.bound}")
    return EXIT_OK


def _load_matrix(path: str) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read matrix: {exc}")
    try:
        if p.suffix == ".json":
            d = json.loads(text)
            return np.array([[float(x) for x in row] for row in (d["P"] if isinstance(d, dict) else d)])
        return np.loadtxt(p, delimiter=",", comments="#", ndmin=2)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse matrix {path}: {exc}")


def cmd_measure(config: RunConfig, graph: str | None = None, matrix: str | None = None,
                kind: str = "uniform", horizon: int | None = None) -> int:
    g = _load_graph(_graph_path(config, graph))
    try:
        comp = largest_component(g)
    except ValueError:
        print("graph has no cycle; no measure", file=sys.stderr)
        return EXIT_FAIL
    A = comp.adjacency
    if matrix:
        P = _load_matrix(matrix)
    elif kind == "random":
        P = random_rows(A, np.random.default_rng(config.rng_seed))
    else:
        P = uniform_rows(A)
    try:
        mu = MarkovMeasure.from_matrix(P, A)
    except SupportMismatch as exc:
        print(f"support mismatch: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"invalid stochastic matrix: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = _header(config, "measure")
    report["scope"] = "largest strongly connected component of the materialized subgraph"
    report["component_nodes"] = [g.node_of[c] for c in comp.codes]
    report["stationary"] = [repr(float(x)) for x in mu.p]
    report["residual"] = stationary_residual(mu.P, mu.p)
    report["entropy"] = shift_entropy(mu)
    report["cylinders"] = {f"{i}": cylinder_mass(mu, [i]).mass for i in range(comp.size)}
    report["cylinders2"] = {f"{e.source},{e.target}": cylinder_mass(mu, [e.source, e.target]).mass
                            for e in comp.edges}
    tight = find_tight_words(comp, config.depth)
    if tight:
        w = min(tight, key=len)
        m = horizon or 4 * len(w)
        q = avoidance_probability(mu, w.nodes, m)
        report["avoidance"] = {"word": list(w.nodes), "m": m, "probability": q.probability,
                               "rate": q.rate, "constant": q.constant}
        _write(_out_dir(config) / "avoidance.csv", _csv_header(config, "measure") + q.to_csv())
        print(f"tight word of {len(w)} letters: avoidance probability {q.probability:.6g} "
              f"at m={m}, decay rate {q.rate:.6g}")
    else:
        report["avoidance"] = None
        print(f"no tight word within {config.depth} letters")
    _write(_out_dir(config) / "measure.json", json.dumps(report, indent=1, sort_keys=True))
    print(f"stationary residual {report['residual']:.3g}, entropy {report['entropy']:.6g}")
    return EXIT_OK


def cmd_roof(config: RunConfig, graph: str | None = None, loop_index: int | None = None) -> int:
    g = _load_graph(_graph_path(config, graph))
    census = enumerate_loops(g, config.max_len)
    loops = census.loops if loop_index is None else census.loops[loop_index:loop_index + 1]
    lines = [_csv_header(config, "roof").rstrip("\n"),
             "loop,length,roof_sum,radius,log_dilatation,min_roof"]
    for k, loop in enumerate(loops):
        d = loop_dilatation(g, loop)
        lr = loop_roof(g, loop, config.depth)
        lines.append(f"{k if loop_index is None else loop_index},{len(loop)},{lr.total!r},"
                     f"{lr.radius!r},{d.period!r},{min(r.value for r in lr.values)!r}")
        print(f"loop {k}: length {len(loop)}, roof sum {lr.total:.12g} +- {lr.radius:.3g}, "
              f"log dilatation {d.period:.12g}")
    _write(_out_dir(config) / "roof.csv", "\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", type=_surface, default=(0, 5), help="g,m (default 0,5)")
    common.add_argument("--seed", default="builtin", help="seed track JSON file or 'builtin'")
    common.add_argument("--budget", type=int, default=200, help="node budget of the graph")
    common.add_argument("--orbits", type=int, default=0,
                        help="also seed the graph with this many shipped closed orbits")
    common.add_argument("--max-len", type=int, default=20, help="maximal loop length")
    common.add_argument("--rng-seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--depth", type=int, default=40,
                        help="roof evaluation depth and tight word search length")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ttdyn", description="Train track splitting dynamics.")
    p.add_argument("--version", action="version", version=f"ttdyn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", parents=[common], help="validate a track file")
    v.add_argument("path", help="track JSON file, or builtin:g,m")
    sub.add_parser("graph", parents=[common], help="materialize the type graph")
    c = sub.add_parser("census", parents=[common], help="periodic loop census")
    c.add_argument("--graph", help="graph JSON (default OUT/graph.json)")
    c.add_argument("--r-points", type=int, default=12)
    m = sub.add_parser("measure", parents=[common], help="Markov measure report")
    m.add_argument("--graph", help="graph JSON (default OUT/graph.json)")
    m.add_argument("--matrix", help="stochastic matrix (JSON with key P, or CSV)")
    m.add_argument("--kind", choices=("uniform", "random"), default="uniform")
    m.add_argument("--horizon", type=int)
    r = sub.add_parser("roof", parents=[common], help="roof sums around periodic loops")
    r.add_argument("--graph", help="graph JSON (default OUT/graph.json)")
    r.add_argument("--loop", type=int, help="index of a single loop in the census")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = RunConfig(tuple(args.surface), args.seed, args.budget, args.orbits, args.max_len,
                       args.rng_seed, args.out, args.threads, args.depth)
    try:
        config.validate()
        Surface(*config.surface)
        if args.command == "validate":
            return cmd_validate(args.path)
        if args.command == "graph":
            return cmd_graph(config)
        if args.command == "census":
            return cmd_census(config, args.graph, args.r_points)
        if args.command == "measure":
            return cmd_measure(config, args.graph, args.matrix, args.kind, args.horizon)
        if args.command == "roof":
            return cmd_roof(config, args.graph, args.loop)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
