"""
Similarity prototype: symmetric C x C inter-class label correlation matrix
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Tuple
import logging

import numpy as np

from ..errors import DegenerateRepresentationError, DimensionMismatchError
from ..semantic_stats import DatasetSemanticSummary
from .correlation import CORRELATIONS, CorrelationMetric

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SimilarityPrototype:
    class_names: Tuple[str, ...]
    metric: CorrelationMetric
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        names = tuple(self.class_names)
        C = len(names)
        if matrix.shape != (C, C):
            raise DimensionMismatchError(
                f"Prototype matrix has shape {matrix.shape}, expected ({C}, {C})"
            )
        if not np.isfinite(matrix).all():
            raise DegenerateRepresentationError("Prototype matrix holds non-finite entries")
        asymmetry = float(np.max(np.abs(matrix - matrix.T))) if C else 0.0
        if asymmetry > SYMMETRY_TOLERANCE:
            raise DimensionMismatchError(f"Prototype is not symmetric (max asymmetry {asymmetry:.3e})")
        if not (np.diag(matrix) == 1.0).all():
            raise DegenerateRepresentationError("Prototype diagonal entries must equal 1")
        if (matrix < 0.0).any() or (matrix > 1.0).any():
            raise DegenerateRepresentationError("Prototype entries must lie in [0, 1]")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "metric", CorrelationMetric(self.metric))

    @property
    def C(self) -> int:
        return len(self.class_names)


def correlation_matrix(
    vectors: np.ndarray,
    metric: CorrelationMetric,
    names: Sequence[str] = None,
    workers: int = 1,
) -> np.ndarray:
    """
    Correlate every unordered pair of rows once and mirror it; the diagonal is exactly 1

    Raises:
        DegenerateRepresentationError: a row has zero norm (named by class when names are given)
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    C = vectors.shape[0]
    names = list(names) if names is not None else [str(i + 1) for i in range(C)]
    norms = np.linalg.norm(vectors, axis=1)
    for name, norm in zip(names, norms):
        if norm == 0.0:
            raise DegenerateRepresentationError(f"Class {name} has a zero-norm semantic representation")

    correlate = CORRELATIONS[CorrelationMetric(metric)]
    pairs = list(combinations(range(C), 2))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda ij: correlate(vectors[ij[0]], vectors[ij[1]]), pairs))
    else:
        values = [correlate(vectors[i], vectors[j]) for i, j in pairs]

    matrix = np.eye(C, dtype=np.float64)
    for (i, j), value in zip(pairs, values):
        matrix[i, j] = matrix[j, i] = value
    return matrix


def build_prototype(
    summary: DatasetSemanticSummary,
    metric: CorrelationMetric = CorrelationMetric.COSINE,
    workers: int = 1,
) -> SimilarityPrototype:
    """Prototype from the class representations of a dataset summary"""
    metric = CorrelationMetric(metric)
    if summary.C < 2:
        raise DimensionMismatchError(f"A similarity prototype needs at least 2 classes, got {summary.C}")
    matrix = correlation_matrix(summary.matrix(), metric, summary.class_names, workers=workers)
    logger.info(f"Built {metric.value} similarity prototype for {summary.C} classes")
    return SimilarityPrototype(class_names=tuple(summary.class_names), metric=metric, matrix=matrix)
