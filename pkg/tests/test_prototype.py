import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.datagen import make_confusable_profiles, oracle_prototype
from src.errors import DegenerateRepresentationError, DimensionMismatchError
from src.prototype import (
    CorrelationMetric,
    SimilarityPrototype,
    build_prototype,
    correlation_matrix,
    cosine_correlation,
    euclidean_correlation,
)
from tests.helpers import make_summary


class TestCosineCorrelation:
    def test_identical_vectors(self):
        assert cosine_correlation([0.5, 0.5, 0.0], [0.5, 0.5, 0.0]) == 1.0

    def test_disjoint_supports(self):
        assert cosine_correlation([1, 0, 0], [0, 1, 0]) == 0.0

    def test_half_overlap(self):
        assert cosine_correlation([1, 0], [1, 1]) == pytest.approx(0.70711, abs=1e-5)

    def test_zero_norm(self):
        with pytest.raises(DegenerateRepresentationError):
            cosine_correlation([0, 0, 0], [1, 0, 0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_correlation([1, 0], [1, 0, 0])


class TestEuclideanCorrelation:
    def test_identical_vectors(self):
        assert euclidean_correlation([0.2, 0.8], [0.2, 0.8]) == 1.0

    def test_unit_vectors(self):
        a = np.zeros(5)
        b = np.zeros(5)
        a[0] = 1.0
        b[1] = 1.0
        assert euclidean_correlation(a, b) == pytest.approx(0.24312, abs=1e-5)
        assert euclidean_correlation(a, b) == pytest.approx(math.exp(-math.sqrt(2.0)), abs=1e-15)

    def test_shifted_coordinate(self):
        assert euclidean_correlation([0.3, 0.7], [0.4, 0.7]) == pytest.approx(0.90484, abs=1e-5)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            euclidean_correlation([1, 0], [1, 0, 0])

    @given(st.floats(0.0, 5.0), st.floats(1e-6, 5.0))
    def test_monotone_in_distance(self, near, gap):
        far = near + gap
        assert euclidean_correlation([0.0], [near]) > euclidean_correlation([0.0], [far])


class TestBuildPrototype:
    @pytest.mark.parametrize("metric", list(CorrelationMetric))
    def test_identical_classes(self, metric):
        prototype = build_prototype(make_summary([[0.2, 0.7, 1.0], [0.2, 0.7, 1.0]]), metric)
        assert prototype.matrix[0, 1] == 1.0
        assert prototype.matrix[1, 0] == 1.0

    def test_disjoint_cosine(self):
        prototype = build_prototype(make_summary([[1, 0, 0], [0, 0, 1]]), CorrelationMetric.COSINE)
        assert prototype.matrix.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    @pytest.mark.parametrize("metric", list(CorrelationMetric))
    def test_matches_all_pairs_recomputation(self, metric):
        rng = np.random.default_rng(7)
        values = rng.uniform(0.0, 1.0, size=(3, 6))
        prototype = build_prototype(make_summary(values), metric)
        for i in range(3):
            for j in range(3):
                if i == j:
                    expected = 1.0
                elif metric is CorrelationMetric.COSINE:
                    expected = values[i] @ values[j] / (np.linalg.norm(values[i]) * np.linalg.norm(values[j]))
                else:
                    expected = math.exp(-np.linalg.norm(values[i] - values[j]))
                assert prototype.matrix[i, j] == pytest.approx(expected, abs=1e-12)

    def test_degenerate_class_named(self):
        summary = make_summary([[1, 0], [0, 0], [0, 1]], names=["hall", "void", "attic"])
        with pytest.raises(DegenerateRepresentationError, match="void"):
            build_prototype(summary, CorrelationMetric.COSINE)

    def test_needs_two_classes(self):
        with pytest.raises(DimensionMismatchError):
            build_prototype(make_summary([[1, 0]]))

    def test_threaded_pairs_match(self):
        values = np.random.default_rng(3).uniform(size=(6, 4))
        sequential = correlation_matrix(values, CorrelationMetric.COSINE)
        threaded = correlation_matrix(values, CorrelationMetric.COSINE, workers=4)
        assert np.array_equal(sequential, threaded)

    def test_prototype_is_frozen(self):
        prototype = build_prototype(make_summary([[1, 1], [1, 0]]))
        with pytest.raises(ValueError):
            prototype.matrix[0, 1] = 0.5

    def test_rejects_asymmetric_matrix(self):
        with pytest.raises(DimensionMismatchError, match="symmetric"):
            SimilarityPrototype(("a", "b"), CorrelationMetric.COSINE, [[1.0, 0.2], [0.3, 1.0]])

    def test_rejects_non_unit_diagonal(self):
        with pytest.raises(DegenerateRepresentationError, match="diagonal"):
            SimilarityPrototype(("a", "b"), CorrelationMetric.COSINE, [[0.9, 0.2], [0.2, 1.0]])


class TestPrototypeInvariants:
    @given(st.integers(0, 2**32 - 1), st.sampled_from(list(CorrelationMetric)))
    def test_symmetric_unit_diagonal_in_range(self, seed, metric):
        rng = np.random.default_rng(seed)
        C = int(rng.integers(2, 8))
        L = int(rng.integers(1, 12))
        values = rng.integers(0, 5, size=(C, L)) / 4.0
        values[np.arange(C), rng.integers(0, L, size=C)] = 1.0
        matrix = build_prototype(make_summary(values), metric).matrix
        assert np.array_equal(matrix, matrix.T)
        assert (np.diag(matrix) == 1.0).all()
        assert (matrix >= 0.0).all() and (matrix <= 1.0).all()

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
    def test_cosine_scale_invariance(self, seed, scale):
        rng = np.random.default_rng(seed)
        values = rng.uniform(0.01, 1.0, size=(4, 5))
        scaled = values.copy()
        scaled[0] *= scale
        a = correlation_matrix(values, CorrelationMetric.COSINE)
        b = correlation_matrix(scaled, CorrelationMetric.COSINE)
        assert np.max(np.abs(a - b)) <= 1e-12


class TestOverlapOrdering:
    @given(st.integers(0, 2**32 - 1), st.floats(0.6, 0.9), st.floats(0.0, 0.1),
           st.sampled_from(list(CorrelationMetric)))
    def test_more_shared_mass_means_more_similar(self, seed, hi, lo, metric):
        profiles = make_confusable_profiles(3, 15, [(0, 1, hi), (0, 2, lo)], seed=seed, regions=1)
        matrix = oracle_prototype(profiles, metric=metric).matrix
        assert matrix[0, 1] > matrix[0, 2]
