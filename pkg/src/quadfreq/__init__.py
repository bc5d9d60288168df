"""quadfreq: sparse candidate graphs for TSP via frequency quadrilaterals.

A complete (or dense) instance is reduced to a sparse candidate edge set by
repeatedly scoring every edge with the optimal 4-vertex paths of the
quadrilaterals containing it and discarding the lowest-scoring third.
"""

__version__ = "0.1.0"

from .analysis import (
    DiagnosticsReport,
    Metrics,
    brute_force_ohc,
    frequency_diagnostics,
    lost_ohc_edges,
    metrics,
    random_euclidean_instance,
)
from .estimator import QuadFrequencySparsifier
from .frequencies import FrequencyTable, accumulate
from .graphs import Graph, complete_graph
from .quads import (
    Quad,
    QuadFrequencies,
    classify_by_sums,
    complete_quad_frequencies,
    incomplete_quad_frequencies,
    op4,
    quad_frequencies,
)
from .sparsify import (
    CycleReport,
    RunResult,
    SparsifyConfig,
    k_max,
    loss_probability,
    perturb,
    prune_once,
    repair_isolated,
    run,
    safe_cycles,
    stop_check,
)
from .tsplib import (
    Instance,
    Tour,
    TsplibParseError,
    UnsupportedFormatError,
    load_instance,
    load_tour,
    parse_instance,
    parse_tour,
)

__all__ = [
    "DiagnosticsReport",
    "FrequencyTable",
    "Graph",
    "Instance",
    "Metrics",
    "Quad",
    "QuadFrequencies",
    "QuadFrequencySparsifier",
    "RunResult",
    "SparsifyConfig",
    "CycleReport",
    "Tour",
    "TsplibParseError",
    "UnsupportedFormatError",
    "accumulate",
    "brute_force_ohc",
    "classify_by_sums",
    "complete_graph",
    "complete_quad_frequencies",
    "frequency_diagnostics",
    "incomplete_quad_frequencies",
    "k_max",
    "load_instance",
    "load_tour",
    "lost_ohc_edges",
    "loss_probability",
    "metrics",
    "op4",
    "parse_instance",
    "parse_tour",
    "perturb",
    "prune_once",
    "quad_frequencies",
    "random_euclidean_instance",
    "repair_isolated",
    "run",
    "safe_cycles",
    "stop_check",
]
