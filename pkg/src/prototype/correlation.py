"""
Label correlation between two class representations
"""
from enum import Enum
import math

import numpy as np

from ..errors import DegenerateRepresentationError, DimensionMismatchError


class CorrelationMetric(str, Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"Cannot correlate vectors of shapes {a.shape} and {b.shape}")
    return a, b


def cosine_correlation(a, b) -> float:
    """(a . b) / (|a| |b|), in [0, 1] for nonnegative inputs"""
    a, b = _pair(a, b)
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateRepresentationError("Cosine correlation of a zero-norm representation")
    # sqrt of the product keeps identical vectors at exactly 1
    value = float(np.dot(a, b) / math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b))))
    # rounding can overshoot the closed interval by an ulp
    return min(max(value, 0.0), 1.0) if (a >= 0).all() and (b >= 0).all() else value


def euclidean_correlation(a, b) -> float:
    """exp(-|a - b|), in (0, 1]"""
    a, b = _pair(a, b)
    return math.exp(-float(np.linalg.norm(a - b)))


CORRELATIONS = {
    CorrelationMetric.COSINE: cosine_correlation,
    CorrelationMetric.EUCLIDEAN: euclidean_correlation,
}
