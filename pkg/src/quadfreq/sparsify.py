"""Iterative edge elimination driven by average quadrilateral frequencies.

Each cycle scores every surviving edge, keeps the top two thirds by average
frequency, repairs vertices that would become isolated, and repeats until a
stop rule fires: the count of below-average edges drops under a third of the
edge set, the next prune would undershoot the target edge count c*n, or the
cycle cap is reached.  The run keeps every intermediate graph together with a
per-cycle report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .frequencies import FrequencyTable, accumulate
from .graphs import Graph, complete_graph
from .tsplib import Instance, Tour

PERTURB_SCALE = 2**30
# sums of three scaled distances must stay well inside int64
MAX_RAW_DISTANCE = 2**31

STOP_RULE_ORDER = ("n_below_rule", "edge_target", "k_max_cap")


@dataclass
class SparsifyConfig:
    """Knobs of a sparsification run; defaults follow the reference protocol."""

    c: float | None = None  # target sparsity coefficient; None = ceil(log2 n)
    retention_ratio: float = 2 / 3
    mode: str = "exhaustive"  # or "sampled"
    sample_size: int = 100
    sample_seed: int = 0
    perturb: str = "auto"  # "auto" (on for EXPLICIT), "on", "off"
    perturb_seed: int = 0
    perturb_amplitude: float = 1.0
    incomplete_activation_cycle: int | None = None  # None = formula default
    stop_rules: tuple[str, ...] = STOP_RULE_ORDER
    max_extra_cycles_after_stop: int = 0

    def validate(self) -> None:
        if not 0 < self.retention_ratio < 1:
            raise ValueError("retention_ratio must lie strictly between 0 and 1")
        if self.c is not None and self.c < 1:
            raise ValueError("c must be at least 1")
        if self.mode not in ("exhaustive", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "sampled" and self.sample_size <= 0:
            raise ValueError("sample_size must be positive")
        if self.perturb not in ("auto", "on", "off"):
            raise ValueError(f"unknown perturb setting {self.perturb!r}")
        if self.perturb_amplitude <= 0:
            raise ValueError("perturb_amplitude must be positive")
        unknown = set(self.stop_rules) - set(STOP_RULE_ORDER)
        if unknown:
            raise ValueError(f"unknown stop rules: {sorted(unknown)}")
        if self.max_extra_cycles_after_stop < 0:
            raise ValueError("max_extra_cycles_after_stop must be >= 0")


@dataclass
class CycleReport:
    """Statistics of one computation cycle (graph G_k plus its prune)."""

    k: int
    edge_count: int
    n_below_3: int
    kept_count: int | None = None
    kept_cut_value: tuple[int, int] | None = None  # exact fbar of last kept edge
    repaired_vertices: list[int] = field(default_factory=list)
    repair_shortfall: list[int] = field(default_factory=list)
    stop_triggered: str | None = None
    post_stop: bool = False
    lost_ohc: int | None = None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "edge_count": self.edge_count,
            "n_below_3": self.n_below_3,
            "kept_count": self.kept_count,
            "kept_cut_value": list(self.kept_cut_value)
            if self.kept_cut_value
            else None,
            "repaired_vertices": [int(v) for v in self.repaired_vertices],
            "repair_shortfall": [int(v) for v in self.repair_shortfall],
            "stop_triggered": self.stop_triggered,
            "post_stop": self.post_stop,
            "lost_ohc": self.lost_ohc,
        }


def default_c(n: int) -> int:
    """ceil(log2 n), the usual sparsity coefficient for n log2 n edges."""
    return (n - 1).bit_length()


def k_max(n: int, c: float) -> int:
    """Cycle cap: smallest k with (2/3)^k <= 2c/(n-1); 0 when 2c >= n-1."""
    if n < 4:
        raise ValueError("need n >= 4")
    if c < 1:
        raise ValueError("need c >= 1")
    target = Fraction(c) * 2 / (n - 1)
    if target >= 1:
        return 0
    k = 0
    ratio = Fraction(1)
    while ratio > target:
        ratio *= Fraction(2, 3)
        k += 1
        if k > 512:
            raise RuntimeError("k_max iteration runaway")
    return k


def loss_probability(n: int, k: int, e0: int) -> float:
    """Chance that a tour edge is dropped at cycle k under blind elimination.

    (1/3) * n / ((2/3)^(k-1) * e0), clamped to [0, 1].
    """
    if k < 1:
        raise ValueError("need k >= 1")
    p = Fraction(n, 3) / (Fraction(2, 3) ** (k - 1) * e0)
    return float(min(max(p, Fraction(0)), Fraction(1)))


def safe_cycles(n: int, m: int = 1) -> int:
    """Cycles that are expected to lose fewer than m tour edges: 2 + ceil(log_{3/2} m).

    Guidance only, never enforced.  Integer m >= 1.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    if not isinstance(m, int) or m < 1:
        raise ValueError("m must be an integer >= 1")
    t = 0
    while m * 2**t > 3**t:
        t += 1
    return 2 + t


def default_incomplete_activation(n: int) -> int:
    """Cycle from which incomplete quads are scored: ceil((2/3) log_{2/3}(2/(n-1)))."""
    if n < 4:
        raise ValueError("need n >= 4")
    # smallest t with (3/2)^(3t) >= ((n-1)/2)^2, i.e. t >= (2/3) log_{3/2}((n-1)/2)
    t = 0
    while 4 * 27**t < 8**t * (n - 1) ** 2:
        t += 1
    return t


@dataclass(eq=False)
class Perturbation:
    """Seeded random additions rd in (0, 1] per edge, held as exact fixed point.

    Working distances become original*scale + offset with integer offsets in
    [1, amplitude*scale], so distance-sum comparisons stay exact while every
    working distance sits in (original, original + amplitude].
    """

    seed: int
    amplitude: float
    scale: int
    offsets: np.ndarray

    def working_matrix(self, distances: np.ndarray) -> np.ndarray:
        return distances.astype(np.int64) * self.scale + self.offsets


def perturb(inst: Instance, seed: int, amplitude: float = 1.0) -> Perturbation:
    """Draw the random distance overlay for an instance (canonical edge order)."""
    n = inst.n
    hi = int(round(amplitude * PERTURB_SCALE))
    if hi < 1:
        raise ValueError("amplitude too small for the fixed-point scale")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    draws = rng.integers(1, hi + 1, size=iu.size, dtype=np.int64)
    offsets = np.zeros((n, n), dtype=np.int64)
    offsets[iu, iv] = draws
    offsets[iv, iu] = draws
    return Perturbation(seed=seed, amplitude=amplitude, scale=PERTURB_SCALE, offsets=offsets)


def retention_count(edge_count: int, ratio: float = 2 / 3) -> int:
    """Edges kept by one prune: ceil(ratio * edge_count), exact for ratio 2/3."""
    if ratio == 2 / 3:
        return (2 * edge_count + 2) // 3
    return math.ceil(ratio * edge_count)


def _sort_edges_for_prune(ft: FrequencyTable) -> list[int]:
    """Indices sorted by average frequency descending, edge lexicographic on ties."""
    keys = []
    for i, (t, c, u, v) in enumerate(
        zip(ft.total.tolist(), ft.count.tolist(), ft.u.tolist(), ft.v.tolist())
    ):
        fbar = Fraction(t, c) if c else Fraction(0)
        keys.append((-fbar, u, v, i))
    keys.sort()
    return [k[-1] for k in keys]


def prune_once(graph: Graph, ft: FrequencyTable) -> tuple[Graph, CycleReport]:
    """Keep the top ceil(2/3 |E|) edges by average frequency."""
    m = graph.edge_count
    if m == 0:
        raise ValueError("cannot prune an empty graph")
    if ft.edge_count != m:
        raise ValueError("frequency table does not cover the graph's edges")
    order = _sort_edges_for_prune(ft)
    keep = retention_count(m)
    kept = order[:keep]
    new_mask = np.zeros_like(graph.mask)
    ku = ft.u[kept]
    kv = ft.v[kept]
    new_mask[ku, kv] = True
    new_mask[kv, ku] = True
    last = kept[-1]
    cut = (
        (int(ft.total[last]), int(ft.count[last]))
        if ft.count[last]
        else (0, 1)
    )
    report = CycleReport(
        k=graph.k,
        edge_count=m,
        n_below_3=ft.n_below_3,
        kept_count=keep,
        kept_cut_value=cut,
    )
    return graph.with_mask(new_mask, k=graph.k + 1), report


def repair_isolated(
    pruned: Graph, previous: Graph, prev_ft: FrequencyTable
) -> tuple[Graph, list[int], list[int]]:
    """Re-add the two best previous edges of every vertex left isolated.

    Candidates are ranked by previous-cycle average frequency (edge
    lexicographic on ties).  Vertices with fewer than two candidates get all
    of them and are flagged.
    """
    degrees = pruned.degrees()
    isolated = [int(v) for v in np.nonzero(degrees == 0)[0]]
    if not isolated:
        return pruned, [], []
    mask = pruned.mask.copy()
    shortfall = []
    for v in isolated:
        neighbors = np.nonzero(previous.mask[v])[0]
        ranked = sorted(
            neighbors.tolist(),
            key=lambda w: (-prev_ft.fbar(v, w), min(v, w), max(v, w)),
        )
        if len(ranked) < 2:
            shortfall.append(v)
        for w in ranked[:2]:
            mask[v, w] = True
            mask[w, v] = True
    repaired = pruned.with_mask(mask, k=pruned.k)
    return repaired, isolated, shortfall


def stop_check(
    report: CycleReport,
    *,
    n: int,
    c: float,
    k_max_value: int,
    rules: tuple[str, ...] = STOP_RULE_ORDER,
) -> str | None:
    """First triggered stop rule for the current (pre-prune) cycle, if any."""
    c_frac = Fraction(c)
    for rule in STOP_RULE_ORDER:
        if rule not in rules:
            continue
        if rule == "n_below_rule":
            if 3 * report.n_below_3 <= report.edge_count:
                return rule
        elif rule == "edge_target":
            if retention_count(report.edge_count) < c_frac * n:
                return rule
        elif rule == "k_max_cap":
            if report.k >= k_max_value:
                return rule
    return None


@dataclass(eq=False)
class RunResult:
    """Every cycle of a run: graphs, reports, stop bookkeeping."""

    instance: Instance
    config: SparsifyConfig
    cycles: list[tuple[Graph, CycleReport]]
    stop_reason: str | None
    stop_index: int | None
    perturbation: Perturbation | None
    c: float
    k_max: int
    incomplete_activation_cycle: int
    frequency_tables: list[FrequencyTable] = field(default_factory=list)

    @property
    def graphs(self) -> list[Graph]:
        return [g for g, _ in self.cycles]

    @property
    def reports(self) -> list[CycleReport]:
        return [r for _, r in self.cycles]

    @property
    def final_graph(self) -> Graph:
        if self.stop_index is not None:
            return self.cycles[self.stop_index][0]
        return self.cycles[-1][0]

    @property
    def final_report(self) -> CycleReport:
        if self.stop_index is not None:
            return self.cycles[self.stop_index][1]
        return self.cycles[-1][1]


def working_distances(inst: Instance, cfg: SparsifyConfig) -> tuple[np.ndarray, Perturbation | None]:
    """Resolve the integer working-distance matrix, applying perturbation."""
    raw = inst.distance_matrix()
    if raw.max(initial=0) > MAX_RAW_DISTANCE:
        raise ValueError("distances too large for exact fixed-point arithmetic")
    enabled = cfg.perturb == "on" or (cfg.perturb == "auto" and inst.kind == "EXPLICIT")
    if enabled:
        overlay = perturb(inst, cfg.perturb_seed, cfg.perturb_amplitude)
        return overlay.working_matrix(raw), overlay
    off_diag = raw[~np.eye(inst.n, dtype=bool)]
    if np.any(off_diag == 0):
        raise ValueError(
            "instance has zero-distance edges; enable perturbation to break them"
        )
    return raw.copy(), None


def run(
    inst: Instance,
    cfg: SparsifyConfig | None = None,
    tour: Tour | None = None,
    *,
    keep_frequency_tables: bool = False,
) -> RunResult:
    """Run the iterative sparsifier on an instance.

    When a tour is supplied every cycle's report carries the count of tour
    edges missing from that cycle's graph.
    """
    cfg = replace(cfg) if cfg is not None else SparsifyConfig()
    cfg.validate()
    n = inst.n
    if tour is not None and tour.n != n:
        raise ValueError(f"tour has {tour.n} vertices, instance has {n}")

    c = cfg.c if cfg.c is not None else float(default_c(n))
    kmax = k_max(n, c) if 2 * c < n - 1 else 0
    activation = (
        cfg.incomplete_activation_cycle
        if cfg.incomplete_activation_cycle is not None
        else default_incomplete_activation(n)
    )
    weights, overlay = working_distances(inst, cfg)

    tour_u = tour_v = None
    if tour is not None:
        pairs = sorted(tour.edges_zero_based())
        tour_u = np.array([a for a, _ in pairs])
        tour_v = np.array([b for _, b in pairs])

    graph = complete_graph(weights)
    cycles: list[tuple[Graph, CycleReport]] = []
    tables: list[FrequencyTable] = []
    stop_reason: str | None = None
    stop_index: int | None = None
    extra_remaining = cfg.max_extra_cycles_after_stop

    while True:
        ft = accumulate(
            graph,
            cfg.mode,
            allow_incomplete=graph.k >= activation,
            sample_size=cfg.sample_size if cfg.mode == "sampled" else None,
            seed=_cycle_seed(cfg.sample_seed, graph.k) if cfg.mode == "sampled" else None,
        )
        report = CycleReport(
            k=graph.k, edge_count=graph.edge_count, n_below_3=ft.n_below_3
        )
        if tour_u is not None:
            report.lost_ohc = int(tour_u.size - graph.mask[tour_u, tour_v].sum())
        cycles.append((graph, report))
        if keep_frequency_tables:
            tables.append(ft)

        if ft.all_zero:
            report.stop_triggered = "no_scoreable_quadrilaterals"
            if stop_reason is None:
                stop_reason = "no_scoreable_quadrilaterals"
                stop_index = len(cycles) - 1
            break

        if stop_reason is None:
            rule = stop_check(
                report, n=n, c=c, k_max_value=kmax, rules=cfg.stop_rules
            )
            if rule is not None:
                report.stop_triggered = rule
                stop_reason = rule
                stop_index = len(cycles) - 1
        else:
            report.post_stop = True

        if stop_reason is not None:
            if extra_remaining <= 0:
                break
            extra_remaining -= 1

        if retention_count(report.edge_count) >= report.edge_count:
            if stop_reason is None:
                stop_reason = "no_progress"
                stop_index = len(cycles) - 1
                report.stop_triggered = "no_progress"
            break

        pruned, prune_report = prune_once(graph, ft)
        report.kept_count = prune_report.kept_count
        report.kept_cut_value = prune_report.kept_cut_value
        repaired, isolated, shortfall = repair_isolated(pruned, graph, ft)
        report.repaired_vertices = isolated
        report.repair_shortfall = shortfall
        graph = repaired

    return RunResult(
        instance=inst,
        config=cfg,
        cycles=cycles,
        stop_reason=stop_reason,
        stop_index=stop_index,
        perturbation=overlay,
        c=c,
        k_max=kmax,
        incomplete_activation_cycle=activation,
        frequency_tables=tables,
    )


def _cycle_seed(base_seed: int, k: int) -> int:
    """Deterministic per-cycle sampling seed derived from the base seed."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(k,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
