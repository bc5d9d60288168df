"""Working graph of a sparsification run: a vertex set plus surviving edges.

The edge set is a symmetric boolean mask over a shared weight matrix; pruning
produces new masks while the weights stay fixed for the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Graph:
    """Surviving edges at cycle k over a fixed working-distance matrix."""

    n: int
    mask: np.ndarray
    weights: np.ndarray
    k: int = 0

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.weights = np.asarray(self.weights, dtype=np.int64)
        if self.mask.shape != (self.n, self.n) or self.weights.shape != (self.n, self.n):
            raise ValueError("mask and weights must be n x n")
        if np.any(np.diagonal(self.mask)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(self.mask, self.mask.T):
            raise ValueError("edge mask must be symmetric")
        if np.any(self.weights[self.mask] <= 0):
            raise ValueError("every edge needs a positive working distance")
        self.mask.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.mask, 1)))

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints (u < v) in lexicographic order."""
        u, v = np.nonzero(np.triu(self.mask, 1))
        return u, v

    def edges(self) -> list[tuple[int, int]]:
        u, v = self.edge_arrays()
        return list(zip(u.tolist(), v.tolist()))

    def degrees(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.mask[u, v])

    def with_mask(self, mask: np.ndarray, k: int) -> "Graph":
        return Graph(n=self.n, mask=mask, weights=self.weights, k=k)


def complete_graph(weights: np.ndarray, k: int = 0) -> Graph:
    weights = np.asarray(weights, dtype=np.int64)
    n = weights.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return Graph(n=n, mask=mask, weights=weights, k=k)
