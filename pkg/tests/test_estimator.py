"""Estimator API: sklearn conventions, validation helpers, transform output."""

import numpy as np
import pytest
from scipy import sparse
from sklearn.base import clone

from quadfreq import QuadFrequencySparsifier
from quadfreq._validation import check_distance_matrix


def random_matrix(n, seed=0):
    rng = np.random.default_rng(seed)
    m = rng.integers(1, 10**5, size=(n, n))
    m = np.triu(m, 1)
    m = m + m.T
    return m


class TestValidation:
    def test_accepts_valid_matrix(self):
        m = random_matrix(6)
        out = check_distance_matrix(m)
        assert out.dtype == np.int64

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            check_distance_matrix(np.ones((3, 4)))

    def test_rejects_asymmetric(self):
        m = random_matrix(5).astype(float)
        m[0, 1] += 1
        with pytest.raises(ValueError, match="symmetric"):
            check_distance_matrix(m)

    def test_rejects_nonzero_diagonal(self):
        m = random_matrix(5)
        np.fill_diagonal(m, 3)
        with pytest.raises(ValueError, match="diagonal"):
            check_distance_matrix(m)

    def test_rejects_fractional_values(self):
        m = random_matrix(5).astype(float)
        m[0, 1] = m[1, 0] = 2.5
        with pytest.raises(ValueError, match="integer"):
            check_distance_matrix(m)

    def test_rejects_tiny(self):
        with pytest.raises(ValueError, match="at least 4"):
            check_distance_matrix(np.zeros((3, 3)))


class TestEstimator:
    def test_get_set_params_round_trip(self):
        est = QuadFrequencySparsifier(c=2, perturb_seed=5)
        params = est.get_params()
        assert params["c"] == 2
        assert params["perturb_seed"] == 5
        est2 = QuadFrequencySparsifier().set_params(**params)
        assert est2.get_params() == params

    def test_clone_compatible(self):
        est = QuadFrequencySparsifier(c=1, mode="sampled", sample_size=30)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_fit_transform_masks_matrix(self):
        m = random_matrix(16, seed=2)
        est = QuadFrequencySparsifier(c=1)
        out = est.fit_transform(m)
        assert sparse.issparse(out)
        dense = out.toarray()
        assert dense.shape == (16, 16)
        # surviving entries carry the original distances, the rest are zero
        assert np.array_equal(dense != 0, est.mask_)
        assert np.array_equal(dense[est.mask_], m[est.mask_])
        assert np.array_equal(est.mask_, est.mask_.T)
        # actually sparsified
        assert est.mask_.sum() < (m > 0).sum()

    def test_fit_attributes(self):
        m = random_matrix(12, seed=3)
        est = QuadFrequencySparsifier(c=1).fit(m)
        assert est.n_features_in_ == 12
        assert est.stop_reason_ is not None
        assert est.n_cycles_ == len(est.result_.cycles)
        assert len(est.candidate_edges()) == est.result_.final_graph.edge_count

    def test_transform_requires_fit(self):
        with pytest.raises(RuntimeError, match="fit"):
            QuadFrequencySparsifier().transform(random_matrix(6))

    def test_transform_checks_shape(self):
        est = QuadFrequencySparsifier(c=1).fit(random_matrix(12, seed=1))
        with pytest.raises(ValueError, match="vertices"):
            est.transform(random_matrix(10))

    def test_deterministic_given_seeds(self):
        m = random_matrix(14, seed=8)
        a = QuadFrequencySparsifier(c=1, perturb="on", perturb_seed=2).fit(m)
        b = QuadFrequencySparsifier(c=1, perturb="on", perturb_seed=2).fit(m)
        assert np.array_equal(a.mask_, b.mask_)
