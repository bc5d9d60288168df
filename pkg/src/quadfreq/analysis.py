"""Verification of preserved graphs against known optima and model diagnostics.

Supplied optimal tours are trusted inputs; for tiny instances an exhaustive
permutation solver provides an exact tour so the probability model can be
checked without external data.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice, permutations

import numpy as np

from .frequencies import edge_frequency_in_quads
from .graphs import Graph, complete_graph
from .tsplib import Instance, Tour

BRUTE_FORCE_LIMIT = 12


@dataclass
class Metrics:
    """Sparsity statistics of a preserved graph."""

    c: float
    d: int
    d_ceil: int
    rho: float | None = None
    l_ohc: int | None = None

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "d": self.d,
            "d_ceil": self.d_ceil,
            "rho": self.rho,
            "l_ohc": self.l_ohc,
        }


def lost_ohc_edges(graph: Graph, tour: Tour) -> int:
    """Number of tour edges absent from the graph."""
    if tour.n != graph.n:
        raise ValueError(f"tour has {tour.n} vertices, graph has {graph.n}")
    return sum(1 for u, v in tour.edges_zero_based() if not graph.mask[u, v])


def metrics(
    graph: Graph,
    ks_context: tuple[int, int] | None = None,
    tour: Tour | None = None,
) -> Metrics:
    """Compute c = |E|/n, average degree d, optional rho and lost-edge count.

    d uses nearest-integer rounding of 2|E|/n (the ceiling variant is reported
    alongside since the two occasionally differ).
    """
    e = graph.edge_count
    if e == 0:
        raise ValueError("metrics need a nonempty graph")
    n = graph.n
    d_near = (4 * e + n) // (2 * n)  # floor(2e/n + 1/2) in exact arithmetic
    d_ceil = -(-2 * e // n)
    rho = None
    if ks_context is not None:
        e_ks, e_below = ks_context
        third = e_ks / 3
        rho = (third - e_below) / third
    l_ohc = lost_ohc_edges(graph, tour) if tour is not None else None
    return Metrics(c=e / n, d=int(d_near), d_ceil=int(d_ceil), rho=rho, l_ohc=l_ohc)


_PERM_CACHE: dict[int, np.ndarray] = {}


def _canonical_perms(n: int) -> np.ndarray:
    """Orientation-canonical permutations of vertices 1..n-1 (vertex 0 fixed)."""
    arr = _PERM_CACHE.get(n)
    if arr is None:
        flat = np.fromiter(
            (v for p in permutations(range(1, n)) for v in p),
            dtype=np.int8,
        )
        arr = flat.reshape(-1, n - 1)
        arr = arr[arr[:, 0] < arr[:, -1]]
        _PERM_CACHE[n] = arr
    return arr


def _tour_lengths(d: np.ndarray, perms: np.ndarray) -> np.ndarray:
    cost = d[0, perms[:, 0]] + d[perms[:, -1], 0]
    for i in range(perms.shape[1] - 1):
        cost = cost + d[perms[:, i], perms[:, i + 1]]
    return cost


def brute_force_ohc(inst: Instance) -> Tour:
    """Exact optimal tour by exhaustive permutation (vertex 1 fixed).

    Deterministic: among equally short tours the lexicographically smallest
    canonical order wins.  Refused above 12 vertices.
    """
    n = inst.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refused for n = {n} > {BRUTE_FORCE_LIMIT}")
    d = inst.distance_matrix()
    if n <= 10:
        perms = _canonical_perms(n)
        cost = _tour_lengths(d, perms)
        best = perms[int(np.argmin(cost))]
    else:
        # stream in chunks to bound memory for n in (11, 12)
        best = None
        best_cost = None
        gen = permutations(range(1, n))
        chunk_rows = 1_000_000
        while True:
            flat = np.fromiter(
                (v for p in islice(gen, chunk_rows) for v in p), dtype=np.int8
            )
            if flat.size == 0:
                break
            arr = flat.reshape(-1, n - 1)
            arr = arr[arr[:, 0] < arr[:, -1]]
            if arr.size == 0:
                continue
            cost = _tour_lengths(d, arr)
            i = int(np.argmin(cost))
            if best_cost is None or cost[i] < best_cost:
                best_cost = int(cost[i])
                best = arr[i]
    order = (1,) + tuple(int(v) + 1 for v in best)
    return Tour(order=order)


def random_euclidean_instance(n: int, seed: int, box: float = 1_000_000.0) -> Instance:
    """Random EUC_2D instance with i.i.d. uniform coordinates in [0, box)^2.

    Redraws on the (vanishingly rare) event that two points round to
    distance zero, so the complete working graph stays valid.
    """
    rng = np.random.default_rng(seed)
    while True:
        coords = rng.uniform(0.0, box, size=(n, 2))
        inst = Instance(name=f"random-euc-{n}-{seed}", n=n, kind="EUC_2D", coords=coords)
        d = inst.distance_matrix()
        off = d[~np.eye(n, dtype=bool)]
        if off.min() > 0:
            return inst


@dataclass
class DiagnosticsReport:
    """Empirical frequency-distribution checks for one instance."""

    n: int
    quads_per_edge: int
    seed: int
    p_all: dict[int, float]
    p_ohc: dict[int, float]
    mean_fbar_all: float
    mean_fbar_ohc: float
    min_fbar_ohc: float
    frac_ohc_ge3: float
    expected_fbar_ohc: float
    expected_p5_ohc: float
    expected_p1_ohc: float
    prior_bound_coeff: float
    min_ohc_fbar_above_prior_bound: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "quads_per_edge": self.quads_per_edge,
            "seed": self.seed,
            "p_all": {str(k): v for k, v in self.p_all.items()},
            "p_ohc": {str(k): v for k, v in self.p_ohc.items()},
            "mean_fbar_all": self.mean_fbar_all,
            "mean_fbar_ohc": self.mean_fbar_ohc,
            "min_fbar_ohc": self.min_fbar_ohc,
            "frac_ohc_ge3": self.frac_ohc_ge3,
            "expected_fbar_ohc": self.expected_fbar_ohc,
            "expected_p5_ohc": self.expected_p5_ohc,
            "expected_p1_ohc": self.expected_p1_ohc,
            "prior_bound_coeff": self.prior_bound_coeff,
            "min_ohc_fbar_above_prior_bound": self.min_ohc_fbar_above_prior_bound,
        }


def sample_edge_frequencies(
    graph: Graph, quads_per_edge: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw random complete quadrilaterals per edge; tally frequency values.

    Returns (counts, edges): counts is (m, 6) with column f holding how often
    edge i scored frequency f; edges stacks the (u, v) endpoint arrays in
    lexicographic edge order.
    """
    n = graph.n
    eu, ev = graph.edge_arrays()
    m = eu.size
    rng = np.random.default_rng(seed)
    counts = np.zeros((m, 6), dtype=np.int64)
    uu = np.repeat(eu, quads_per_edge)
    vv = np.repeat(ev, quads_per_edge)
    slots = np.repeat(np.arange(m), quads_per_edge)
    pending = np.arange(uu.size)
    while pending.size:
        w = rng.integers(0, n, pending.size)
        x = rng.integers(0, n, pending.size)
        pu, pv = uu[pending], vv[pending]
        ok = (w != x) & (w != pu) & (w != pv) & (x != pu) & (x != pv)
        idx = pending[ok]
        scoreable, freq = edge_frequency_in_quads(
            graph, uu[idx], vv[idx], w[ok], x[ok], allow_incomplete=False
        )
        got = idx[scoreable]
        np.add.at(counts, (slots[got], freq[scoreable]), 1)
        pending = pending[~ok]
    return counts, np.stack((eu, ev))


def frequency_diagnostics(
    inst: Instance,
    quads_per_edge: int = 200,
    seed: int = 0,
    tour: Tour | None = None,
) -> DiagnosticsReport:
    """Check the 1/3-uniform model and the tour-edge frequency lift.

    Needs the exact brute-force tour (n <= 12) unless a trusted tour is
    supplied.
    """
    n = inst.n
    if tour is None:
        if n > BRUTE_FORCE_LIMIT:
            raise ValueError(
                f"n = {n} > {BRUTE_FORCE_LIMIT}: supply a tour for diagnostics"
            )
        tour = brute_force_ohc(inst)
    graph = complete_graph(inst.distance_matrix())
    counts, edges = sample_edge_frequencies(graph, quads_per_edge, seed)
    eu, ev = edges
    edge_pos = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(eu, ev))}
    ohc_idx = np.array(
        sorted(edge_pos[e] for e in tour.edges_zero_based()), dtype=np.int64
    )

    fvals = np.arange(6)
    all_totals = counts.sum(axis=0)
    all_n = all_totals.sum()
    ohc_totals = counts[ohc_idx].sum(axis=0)
    ohc_n = ohc_totals.sum()

    per_edge_fbar = counts @ fvals / counts.sum(axis=1)
    ohc_fbar = per_edge_fbar[ohc_idx]

    prior_coeff = 7 / 3 + 4 / (3 * (n - 3))
    return DiagnosticsReport(
        n=n,
        quads_per_edge=quads_per_edge,
        seed=seed,
        p_all={f: float(all_totals[f] / all_n) for f in (5, 3, 1)},
        p_ohc={f: float(ohc_totals[f] / ohc_n) for f in (5, 3, 1)},
        mean_fbar_all=float(all_totals @ fvals / all_n),
        mean_fbar_ohc=float(ohc_totals @ fvals / ohc_n),
        min_fbar_ohc=float(ohc_fbar.min()),
        frac_ohc_ge3=float(ohc_totals[3:].sum() / ohc_n),
        expected_fbar_ohc=3 + 2 / (n - 2),
        expected_p5_ohc=1 / 3 + 1 / (3 * (n - 2)),
        expected_p1_ohc=1 / 3 - 2 / (3 * (n - 2)),
        prior_bound_coeff=prior_coeff,
        min_ohc_fbar_above_prior_bound=bool(ohc_fbar.min() > prior_coeff),
    )


def diagnostics_trials(
    n: int, trials: int, seed: int, quads_per_edge: int = 200
) -> dict:
    """Aggregate frequency diagnostics over seeded random instances."""
    reports = []
    for t in range(trials):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(t,))
        inst_seed, quad_seed = (int(v) for v in ss.generate_state(2, dtype=np.uint32))
        inst = random_euclidean_instance(n, inst_seed)
        reports.append(
            frequency_diagnostics(inst, quads_per_edge, quad_seed)
        )
    mean_ohc = [r.mean_fbar_ohc for r in reports]
    p5_all = [r.p_all[5] for r in reports]
    p3_all = [r.p_all[3] for r in reports]
    p1_all = [r.p_all[1] for r in reports]
    return {
        "n": n,
        "trials": trials,
        "seed": seed,
        "quads_per_edge": quads_per_edge,
        "grand_mean_fbar_ohc": float(np.mean(mean_ohc)),
        "expected_fbar_ohc": 3 + 2 / (n - 2),
        "min_instance_mean_fbar_ohc": float(np.min(mean_ohc)),
        "grand_p_all": {
            "5": float(np.mean(p5_all)),
            "3": float(np.mean(p3_all)),
            "1": float(np.mean(p1_all)),
        },
        "se_p_all": {
            "5": float(np.std(p5_all, ddof=1) / np.sqrt(trials)) if trials > 1 else None,
            "3": float(np.std(p3_all, ddof=1) / np.sqrt(trials)) if trials > 1 else None,
            "1": float(np.std(p1_all, ddof=1) / np.sqrt(trials)) if trials > 1 else None,
        },
        "grand_frac_ohc_ge3": float(np.mean([r.frac_ohc_ge3 for r in reports])),
        "prior_bound_coeff": reports[0].prior_bound_coeff if reports else None,
        "instances": [r.to_dict() for r in reports],
    }
