"""Train track splitting dynamics: tracks, moves, measure cones, the subshift of
numbered types, Markov measures, roof function and periodic loop census."""

__version__ = "0.1.0"

from .track import (BranchClass, Region, Surface, Track, TrackError, UnsupportedSurface,
                    ValidationReport, canonical_code, classify_branches, regions, validate,
                    validate_data)
from .moves import (InvalidMove, MoveRecord, SplitDirection, compatible_direction, full_split,
                    shift, split, tangential_pushforward, unsplit)
from .cones import (check_switch_conditions, is_recurrent, is_transversely_recurrent, normalize_large,
                    pairing, vertex_cycles)
from .typegraph import (TypeGraph, Word, analyze_shift, build_type_graph, find_tight_words,
                        shift_class_code)
from .markov import (MarkovMeasure, avoidance_probability, cylinder_mass, lebesgue_transitions_mc,
                     shift_entropy, stationary)
from .flow import (CountReport, PeriodicLoop, RoofValue, count_report, dilatation, enumerate_loops,
                   flow_entropy, loop_matrix, roof_estimate)
from .seeds import seed_track

__all__ = [
    "BranchClass", "Region", "Surface", "Track", "TrackError", "UnsupportedSurface",
    "ValidationReport", "canonical_code", "classify_branches", "regions", "validate",
    "validate_data", "InvalidMove", "MoveRecord", "SplitDirection", "compatible_direction",
    "full_split", "shift", "split", "tangential_pushforward", "unsplit", "check_switch_conditions",
    "is_recurrent", "is_transversely_recurrent", "normalize_large", "pairing", "vertex_cycles",
    "TypeGraph", "Word", "analyze_shift", "build_type_graph", "find_tight_words",
    "shift_class_code", "MarkovMeasure", "avoidance_probability", "cylinder_mass",
    "lebesgue_transitions_mc", "shift_entropy", "stationary", "CountReport", "PeriodicLoop",
    "RoofValue", "count_report", "dilatation", "enumerate_loops", "flow_entropy", "loop_matrix",
    "roof_estimate", "seed_track",
]
