"""Scikit-learn style wrapper around the sparsifier.

The transformer consumes a precomputed symmetric integer distance matrix
(``metric="precomputed"`` convention) and emits the learned sparse candidate
graph, so it slots into pipelines that feed candidate edge sets to downstream
solvers.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_distance_matrix
from .sparsify import SparsifyConfig, run
from .tsplib import Instance


class QuadFrequencySparsifier(BaseEstimator, TransformerMixin):
    """Iteratively prune a dense TSP distance matrix to a sparse edge set.

    Parameters mirror the run configuration: ``c`` is the target sparsity
    coefficient (None picks ceil(log2 n)), ``mode`` selects exhaustive or
    sampled frequency accumulation, and ``perturb`` controls the random
    tie-breaking overlay ("auto" switches it on for explicit matrices, which
    is every matrix given to this estimator).

    Attributes after ``fit``: ``mask_`` (boolean adjacency of surviving
    edges), ``result_`` (full per-cycle run record), ``stop_reason_`` and
    ``n_cycles_``.
    """

    def __init__(
        self,
        c=None,
        mode="exhaustive",
        sample_size=100,
        sample_seed=0,
        perturb="auto",
        perturb_seed=0,
        perturb_amplitude=1.0,
        incomplete_activation_cycle=None,
        stop_rules=("n_below_rule", "edge_target", "k_max_cap"),
        max_extra_cycles_after_stop=0,
    ):
        self.c = c
        self.mode = mode
        self.sample_size = sample_size
        self.sample_seed = sample_seed
        self.perturb = perturb
        self.perturb_seed = perturb_seed
        self.perturb_amplitude = perturb_amplitude
        self.incomplete_activation_cycle = incomplete_activation_cycle
        self.stop_rules = stop_rules
        self.max_extra_cycles_after_stop = max_extra_cycles_after_stop

    def _config(self) -> SparsifyConfig:
        return SparsifyConfig(
            c=self.c,
            mode=self.mode,
            sample_size=self.sample_size,
            sample_seed=self.sample_seed,
            perturb=self.perturb,
            perturb_seed=self.perturb_seed,
            perturb_amplitude=self.perturb_amplitude,
            incomplete_activation_cycle=self.incomplete_activation_cycle,
            stop_rules=tuple(self.stop_rules),
            max_extra_cycles_after_stop=self.max_extra_cycles_after_stop,
        )

    def fit(self, X, y=None):
        """Run the sparsifier on a square integer distance matrix."""
        X = check_distance_matrix(X)
        inst = Instance(name="precomputed", n=X.shape[0], kind="EXPLICIT", matrix=X)
        self.result_ = run(inst, self._config())
        self.n_features_in_ = X.shape[0]
        self.mask_ = np.asarray(self.result_.final_graph.mask)
        self.stop_reason_ = self.result_.stop_reason
        self.n_cycles_ = len(self.result_.cycles)
        return self

    def transform(self, X):
        """Mask a distance matrix down to the surviving candidate edges.

        Returns a CSR sparse matrix holding the distances of surviving edges.
        """
        if not hasattr(self, "mask_"):
            raise RuntimeError("fit the sparsifier before calling transform")
        X = check_distance_matrix(X)
        if X.shape[0] != self.n_features_in_:
            raise ValueError(
                f"matrix has {X.shape[0]} vertices, fitted with {self.n_features_in_}"
            )
        return sparse.csr_matrix(np.where(self.mask_, X, 0))

    def candidate_edges(self) -> list[tuple[int, int]]:
        """Surviving edges as 0-indexed (u, v) pairs, u < v, lexicographic."""
        if not hasattr(self, "mask_"):
            raise RuntimeError("fit the sparsifier before asking for edges")
        u, v = np.nonzero(np.triu(self.mask_, 1))
        return list(zip(u.tolist(), v.tolist()))
