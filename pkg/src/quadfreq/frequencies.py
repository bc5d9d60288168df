"""Vectorized accumulation of quadrilateral frequencies over a graph.

Two modes are provided.  Exhaustive mode enumerates every 4-vertex subset
once, scores the scoreable ones (all six edges present, or at least four when
incomplete scoring is switched on) and scatters the result to all member
edges.  Sampled mode draws, for each surviving edge, a fixed number of
scoreable quadrilaterals containing it by rejection from the uniform
distribution, and accumulates only that edge's own frequency.

All scoring reduces to integer comparisons of working distances, so results
are exact and schedule independent.  The per-quad logic mirrors
``quadfreq.quads`` (the explicit reference implementation); the test suite
checks the two against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Graph

# Edge slots of a vertex-sorted quad (a < b < c < d):
#   0: (a,b)  1: (a,c)  2: (a,d)  3: (b,c)  4: (b,d)  5: (c,d)
# Opposite pairs by slot: {0,5}, {1,4}, {2,3}.
_SLOT_U = (0, 0, 0, 1, 1, 2)
_SLOT_V = (1, 2, 3, 2, 3, 3)

# For every endpoint slot, the two candidate 4-vertex paths as edge-slot
# triples.  Path A starts at the smaller endpoint through the smaller interior
# vertex, so A wins distance ties (lexicographic rule).
_COMPETITIONS = (
    ((1, 5, 4), (2, 5, 3)),  # endpoints (a,b), interiors c,d
    ((0, 4, 5), (2, 4, 3)),  # endpoints (a,c), interiors b,d
    ((0, 3, 5), (1, 3, 4)),  # endpoints (a,d), interiors b,c
    ((0, 2, 5), (4, 2, 1)),  # endpoints (b,c), interiors a,d
    ((0, 1, 5), (3, 1, 2)),  # endpoints (b,d), interiors a,c
    ((1, 0, 4), (3, 0, 2)),  # endpoints (c,d), interiors a,b
)

# slot index from the two sorted positions of an edge's endpoints
_SLOT_OF_POS = np.full((4, 4), -1, dtype=np.int64)
for _s, (_pu, _pv) in enumerate(zip(_SLOT_U, _SLOT_V)):
    _SLOT_OF_POS[_pu, _pv] = _s
    _SLOT_OF_POS[_pv, _pu] = _s

SAMPLED_MAX_ROUNDS = 500


@dataclass(eq=False)
class FrequencyTable:
    """Per-edge frequency totals over the quadrilaterals scored for the edge.

    ``total`` is F(e), ``count`` is N(e); the average frequency F(e)/N(e) is
    kept exact (``fbar`` returns a Fraction, 0 when N(e) = 0).
    ``value_counts[f]`` optionally histograms the frequency values an edge
    received from complete quadrilaterals.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    total: np.ndarray
    count: np.ndarray
    value_counts: np.ndarray | None = None

    def __post_init__(self):
        self._pos = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.u, self.v))}

    @property
    def edge_count(self) -> int:
        return self.u.size

    def index_of(self, u: int, v: int) -> int:
        return self._pos[(u, v) if u < v else (v, u)]

    def fbar(self, u: int, v: int) -> Fraction:
        i = self.index_of(u, v)
        if self.count[i] == 0:
            return Fraction(0)
        return Fraction(int(self.total[i]), int(self.count[i]))

    def fbar_floats(self) -> np.ndarray:
        out = np.zeros(self.u.size)
        nz = self.count > 0
        out[nz] = self.total[nz] / self.count[nz]
        return out

    @property
    def n_below_3(self) -> int:
        """Edges scored by at least one quad whose average sits strictly below 3.

        Edges contained in no scoreable quadrilateral (N = 0) have no average
        to compare and are not counted; they still rank last when pruning.
        """
        return int(np.count_nonzero((self.count > 0) & (self.total < 3 * self.count)))

    @property
    def all_zero(self) -> bool:
        return not bool(self.total.any())

    def mean_fbar(self) -> Fraction:
        if self.u.size == 0:
            return Fraction(0)
        acc = Fraction(0)
        for t, c in zip(self.total.tolist(), self.count.tolist()):
            if c:
                acc += Fraction(t, c)
        return acc / self.u.size


def accumulate(
    graph: Graph,
    mode: str = "exhaustive",
    *,
    allow_incomplete: bool = False,
    sample_size: int | None = None,
    seed: int | None = None,
    value_counts: bool = False,
) -> FrequencyTable:
    """Build the frequency table of a graph.

    mode="exhaustive" visits every 4-subset once; mode="sampled" draws
    ``sample_size`` scoreable quadrilaterals per edge from the stream seeded
    by ``seed`` (edges that never yield a scoreable quad keep N = 0).
    """
    if graph.n < 4:
        raise ValueError("need at least 4 vertices")
    if mode == "exhaustive":
        return _accumulate_exhaustive(graph, allow_incomplete, value_counts)
    if mode == "sampled":
        if sample_size is None or sample_size <= 0:
            raise ValueError("sampled mode needs a positive sample_size")
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        if value_counts:
            raise ValueError("value_counts is only tracked in exhaustive mode")
        return _accumulate_sampled(graph, sample_size, seed, allow_incomplete)
    raise ValueError(f"unknown mode {mode!r}")


def competition_frequencies(present: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Frequencies of the 6 edge slots of vertex-sorted quads, shape (6, S).

    Generic valid-path rule: for each endpoint pair the shorter fully-present
    candidate path is selected (ties go to path A, the lexicographic winner);
    an edge's frequency is the number of selected paths containing it.
    """
    freq = np.zeros(present.shape, dtype=np.int64)
    for slots_a, slots_b in _COMPETITIONS:
        pa = present[slots_a[0]] & present[slots_a[1]] & present[slots_a[2]]
        pb = present[slots_b[0]] & present[slots_b[1]] & present[slots_b[2]]
        sa = dists[slots_a[0]] + dists[slots_a[1]] + dists[slots_a[2]]
        sb = dists[slots_b[0]] + dists[slots_b[1]] + dists[slots_b[2]]
        choose_a = pa & (~pb | (sa <= sb))
        choose_b = pb & ~choose_a
        for s in slots_a:
            freq[s] += choose_a
        for s in slots_b:
            freq[s] += choose_b
    return freq


def _complete_pair_freqs(s0, s1, s2):
    """5/3/1 frequencies of the three opposite pairs from their distance sums.

    Stable ranking: ties are won by the pair whose lexicographically smallest
    edge comes first, which is exactly what path enumeration with the
    lexicographic tie rule produces.
    """
    r0 = (s1 < s0).astype(np.int64) + (s2 < s0)
    r1 = (s0 <= s1).astype(np.int64) + (s2 < s1)
    r2 = (s0 <= s2).astype(np.int64) + (s1 <= s2)
    return 5 - 2 * r0, 5 - 2 * r1, 5 - 2 * r2


def _accumulate_exhaustive(graph: Graph, allow_incomplete: bool, value_counts: bool):
    n = graph.n
    mask, weights = graph.mask, graph.weights
    flat_mask = mask.ravel()
    flat_w = weights.ravel()
    f_acc = np.zeros(n * n)
    n_acc = np.zeros(n * n)
    vc_acc = np.zeros((6, n * n)) if value_counts else None

    for j in range(1, n - 1):
        tail = np.arange(j + 1, n)
        if tail.size < 2:
            continue
        kr, lr = np.triu_indices(tail.size, 1)
        kk = tail[kr]
        ll = tail[lr]
        kl_flat = kk * n + ll
        p_kl = flat_mask[kl_flat]
        d_kl = flat_w[kl_flat]
        for i in range(j):
            p_ij = bool(mask[i, j])
            p_ik = mask[i, kk]
            p_il = mask[i, ll]
            p_jk = mask[j, kk]
            p_jl = mask[j, ll]
            pcount = (
                p_ik.astype(np.int8) + p_il + p_jk + p_jl + p_kl + np.int8(p_ij)
            )
            complete = pcount == 6
            has_complete = complete.any()
            incomplete = None
            if allow_incomplete:
                incomplete = (pcount >= 4) & ~complete
                if not has_complete and not incomplete.any():
                    continue
            elif not has_complete:
                continue

            d_ij = weights[i, j]
            d_ik = flat_w[i * n + kk]
            d_il = flat_w[i * n + ll]
            d_jk = flat_w[j * n + kk]
            d_jl = flat_w[j * n + ll]
            idx_ij = i * n + j
            slot_idx = (None, i * n + kk, i * n + ll, j * n + kk, j * n + ll, kl_flat)

            if has_complete:
                sel = complete
                s0 = d_ij + d_kl[sel]
                s1 = d_ik[sel] + d_jl[sel]
                s2 = d_il[sel] + d_jk[sel]
                f0, f1, f2 = _complete_pair_freqs(s0, s1, s2)
                cnt = int(sel.sum())
                f_acc[idx_ij] += f0.sum()
                n_acc[idx_ij] += cnt
                scatter = (
                    (slot_idx[5][sel], f0),
                    (slot_idx[1][sel], f1),
                    (slot_idx[4][sel], f1),
                    (slot_idx[2][sel], f2),
                    (slot_idx[3][sel], f2),
                )
                for idx, fv in scatter:
                    np.add.at(f_acc, idx, fv)
                    np.add.at(n_acc, idx, 1.0)
                if vc_acc is not None:
                    for fv in (5, 3, 1):
                        vc_acc[fv, idx_ij] += int((f0 == fv).sum())
                    for idx, farr in scatter:
                        for fv in (5, 3, 1):
                            hit = farr == fv
                            if hit.any():
                                np.add.at(vc_acc[fv], idx[hit], 1.0)

            if incomplete is not None and incomplete.any():
                sel = incomplete
                size = int(sel.sum())
                p6 = np.stack(
                    (
                        np.full(size, p_ij),
                        p_ik[sel],
                        p_il[sel],
                        p_jk[sel],
                        p_jl[sel],
                        p_kl[sel],
                    )
                )
                d6 = np.stack(
                    (
                        np.full(size, d_ij),
                        d_ik[sel],
                        d_il[sel],
                        d_jk[sel],
                        d_jl[sel],
                        d_kl[sel],
                    )
                )
                freq6 = competition_frequencies(p6, d6)
                if p_ij:
                    f_acc[idx_ij] += freq6[0].sum()
                    n_acc[idx_ij] += size
                for s in range(1, 6):
                    pres = p6[s]
                    if pres.any():
                        idx = slot_idx[s][sel][pres]
                        np.add.at(f_acc, idx, freq6[s][pres])
                        np.add.at(n_acc, idx, 1.0)

    return _table_from_flat(graph, f_acc, n_acc, vc_acc)


def _table_from_flat(graph: Graph, f_acc, n_acc, vc_acc):
    eu, ev = graph.edge_arrays()
    flat = eu * graph.n + ev
    vc = None
    if vc_acc is not None:
        vc = vc_acc[:, flat].astype(np.int64)
    return FrequencyTable(
        n=graph.n,
        u=eu.astype(np.int64),
        v=ev.astype(np.int64),
        total=f_acc[flat].astype(np.int64),
        count=n_acc[flat].astype(np.int64),
        value_counts=vc,
    )


def edge_frequency_in_quads(
    graph: Graph,
    eu: np.ndarray,
    ev: np.ndarray,
    w: np.ndarray,
    x: np.ndarray,
    allow_incomplete: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Score edge (eu, ev) inside the quads {eu, ev, w, x}.

    Vertices must be distinct within each quad.  Returns (scoreable, freq):
    quads that are not scoreable (pattern below 4 present edges, or
    incomplete while incomplete scoring is off) get freq 0.
    """
    quad = np.sort(np.stack((eu, ev, w, x)), axis=0)
    iu = quad[np.array(_SLOT_U)]
    iv = quad[np.array(_SLOT_V)]
    p6 = graph.mask[iu, iv]
    d6 = graph.weights[iu, iv]
    pop = p6.sum(axis=0)
    scoreable = pop == 6
    if allow_incomplete:
        scoreable = scoreable | (pop >= 4)

    pos_u = (quad < eu[None, :]).sum(axis=0)
    pos_v = (quad < ev[None, :]).sum(axis=0)
    slot = _SLOT_OF_POS[pos_u, pos_v]

    freq = np.zeros(eu.size, dtype=np.int64)
    if scoreable.any():
        freq6 = competition_frequencies(p6[:, scoreable], d6[:, scoreable])
        freq[scoreable] = np.take_along_axis(
            freq6, slot[scoreable][None, :], axis=0
        )[0]
    return scoreable, freq


def _accumulate_sampled(graph: Graph, sample_size: int, seed: int, allow_incomplete: bool):
    n = graph.n
    eu, ev = graph.edge_arrays()
    m = eu.size
    rng = np.random.default_rng(seed)
    totals = np.zeros(m, dtype=np.int64)
    counts = np.zeros(m, dtype=np.int64)

    pending = np.repeat(np.arange(m), sample_size)
    for _ in range(SAMPLED_MAX_ROUNDS):
        if pending.size == 0:
            break
        size = pending.size
        w = rng.integers(0, n, size)
        x = rng.integers(0, n, size)
        uu = eu[pending]
        vv = ev[pending]
        distinct = (w != x) & (w != uu) & (w != vv) & (x != uu) & (x != vv)
        if not distinct.any():
            continue
        cand = np.nonzero(distinct)[0]
        scoreable, freq = edge_frequency_in_quads(
            graph, uu[cand], vv[cand], w[cand], x[cand], allow_incomplete
        )
        hit = cand[scoreable]
        if hit.size:
            np.add.at(totals, pending[hit], freq[scoreable])
            np.add.at(counts, pending[hit], 1)
            done = np.zeros(size, dtype=bool)
            done[hit] = True
            pending = pending[~done]

    return FrequencyTable(
        n=n,
        u=eu.astype(np.int64),
        v=ev.astype(np.int64),
        total=totals,
        count=counts,
    )
