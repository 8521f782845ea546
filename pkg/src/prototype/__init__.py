"""
Inter-class similarity prototypes
"""
from .correlation import CorrelationMetric, cosine_correlation, euclidean_correlation
from .similarity_prototype import SimilarityPrototype, build_prototype, correlation_matrix
