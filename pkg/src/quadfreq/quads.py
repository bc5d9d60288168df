"""Frequency scoring of a single quadrilateral from its optimal 4-vertex paths.

For every unordered endpoint pair of a 4-vertex set there are two candidate
paths through the remaining two vertices.  The shorter one whose edges all
exist is that pair's optimal path; on equal length the path whose interior
vertex sequence is lexicographically smaller (read from the smaller endpoint)
wins.  An edge's frequency in the quadrilateral is the number of selected
optimal paths that contain it.

This module is the deliberately simple reference used to validate the
vectorized accumulation kernels; it enumerates paths explicitly and works for
complete quadrilaterals (6 edges) as well as incomplete ones (4 or 5 edges).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Literal, Mapping


def edge_key(u: int, v: int) -> tuple[int, int]:
    """Canonical unordered pair."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Quad:
    """Four distinct vertices plus the distances of their existing edges.

    ``distances`` maps canonical pairs to positive finite values; pairs that
    are absent from the mapping are treated as eliminated edges.
    """

    vertices: tuple[int, int, int, int]
    distances: Mapping[tuple[int, int], float]

    def __post_init__(self):
        if len(set(self.vertices)) != 4:
            raise ValueError("quad needs 4 distinct vertices")
        all_pairs = {edge_key(a, b) for a, b in combinations(self.vertices, 2)}
        extra = set(self.distances) - all_pairs
        if extra:
            raise ValueError(f"distance keys outside the quad: {sorted(extra)}")
        if not 4 <= len(self.distances) <= 6:
            raise ValueError("quad must have 4, 5 or 6 present edges")
        for e, d in self.distances.items():
            if not (d > 0 and d < float("inf")):
                raise ValueError(f"edge {e} needs a finite positive distance")
        spanned = {v for e in self.distances for v in e}
        if spanned != set(self.vertices):
            raise ValueError("present edges must span all 4 vertices")

    @property
    def present(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.distances)

    def is_complete(self) -> bool:
        return len(self.distances) == 6


@dataclass
class QuadFrequencies:
    """Per-edge frequencies of one scored quadrilateral."""

    freq: dict[tuple[int, int], int]
    op_count: int

    @property
    def total(self) -> int:
        return sum(self.freq.values())


def opposite_pairs(
    vertices: tuple[int, int, int, int]
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """The three vertex-disjoint edge pairs, ordered by their smallest edge."""
    a, b, c, d = sorted(vertices)
    return [
        (edge_key(a, b), edge_key(c, d)),
        (edge_key(a, c), edge_key(b, d)),
        (edge_key(a, d), edge_key(b, c)),
    ]


def op4(quad: Quad, endpoints) -> tuple[int, int, int, int] | None:
    """Optimal 4-vertex path between two endpoints of the quad, if any.

    Returns the path oriented from the smaller endpoint, or None when neither
    candidate path has all three edges present.
    """
    u, v = sorted(endpoints)
    if u not in quad.vertices or v not in quad.vertices or u == v:
        raise ValueError(f"endpoints {endpoints!r} are not two quad vertices")
    x, y = sorted(w for w in quad.vertices if w not in (u, v))
    best = None
    for first, second in ((x, y), (y, x)):
        edges = (edge_key(u, first), edge_key(first, second), edge_key(second, v))
        if all(e in quad.distances for e in edges):
            total = sum(quad.distances[e] for e in edges)
            cand = (total, (first, second), (u, first, second, v))
            if best is None or cand[:2] < best[:2]:
                best = cand
    return best[2] if best else None


def quad_frequencies(quad: Quad) -> QuadFrequencies:
    """Score a quad by enumerating the optimal path of every endpoint pair."""
    freq = {e: 0 for e in quad.distances}
    op_count = 0
    for endpoints in combinations(quad.vertices, 2):
        path = op4(quad, endpoints)
        if path is None:
            continue
        op_count += 1
        for a, b in zip(path, path[1:]):
            freq[edge_key(a, b)] += 1
    return QuadFrequencies(freq=freq, op_count=op_count)


def complete_quad_frequencies(quad: Quad) -> QuadFrequencies:
    if not quad.is_complete():
        raise ValueError("complete_quad_frequencies requires all 6 edges")
    return quad_frequencies(quad)


def incomplete_quad_frequencies(quad: Quad) -> QuadFrequencies:
    if quad.is_complete():
        raise ValueError("incomplete_quad_frequencies requires 4 or 5 edges")
    return quad_frequencies(quad)


def classify_by_sums(
    quad: Quad,
) -> list[tuple[tuple[int, int], tuple[int, int]]] | Literal["tied"]:
    """Ascending order of the three opposite-pair distance sums, or "tied".

    Independent oracle for complete-quad scoring: with strictly ordered sums
    the minimum pair carries frequency 5, the middle 3 and the maximum 1.
    """
    if not quad.is_complete():
        raise ValueError("classify_by_sums requires all 6 edges")
    pairs = opposite_pairs(quad.vertices)
    sums = [quad.distances[e1] + quad.distances[e2] for e1, e2 in pairs]
    if len(set(sums)) < 3:
        return "tied"
    return [p for _, p in sorted(zip(sums, pairs))]
