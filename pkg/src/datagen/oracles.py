"""
Closed-form expectations for synthetic datasets
"""
from typing import Sequence

import numpy as np

from ..prototype import CorrelationMetric, SimilarityPrototype, correlation_matrix
from ..errors import ProfileSpecError
from .profiles import ClassProfile
from .sampling import SyntheticDataset


def analytic_presence(profile: ClassProfile, regions: int = None) -> np.ndarray:
    """Probability that each label appears in a sampled map: 1 - (1 - p)^K"""
    K = profile.regions if regions is None else regions
    return 1.0 - (1.0 - profile.occurrence) ** K


def oracle_prototype(
    profiles: Sequence[ClassProfile],
    regions: int = None,
    metric: CorrelationMetric = CorrelationMetric.COSINE,
) -> SimilarityPrototype:
    """Prototype the sampled statistics converge to"""
    if len(profiles) < 2:
        raise ProfileSpecError("An oracle prototype needs at least 2 profiles")
    vectors = np.vstack([analytic_presence(p, regions) for p in profiles])
    names = [p.class_name for p in profiles]
    return SimilarityPrototype(
        class_names=tuple(names),
        metric=CorrelationMetric(metric),
        matrix=correlation_matrix(vectors, metric, names),
    )


def nearest_centroid_confusion(dataset: SyntheticDataset) -> np.ndarray:
    """Row-normalized test confusion of a nearest-centroid classifier fitted on the train rows"""
    train_x = dataset.features[dataset.train_rows]
    train_y = dataset.targets[dataset.train_rows]
    centroids = np.vstack([train_x[train_y == c].mean(axis=0) for c in range(dataset.C)])
    test_x = dataset.features[dataset.test_rows]
    test_y = dataset.targets[dataset.test_rows]
    distances = np.linalg.norm(test_x[:, None, :] - centroids[None, :, :], axis=2)
    predicted = np.argmin(distances, axis=1)
    confusion = np.zeros((dataset.C, dataset.C))
    np.add.at(confusion, (test_y, predicted), 1.0)
    return confusion / confusion.sum(axis=1, keepdims=True)
