"""
Pair thresholds for batch-level contrastive losses
"""
from enum import Enum

import numpy as np

from ..errors import DimensionMismatchError


class Indexing(str, Enum):
    """How a prototype becomes a B x B threshold matrix"""

    ENTRY = "entry"  # out[i, j] = S[t_i, t_j]
    ROW_PRODUCT = "row_product"  # out[i, j] = S[t_i] . S[t_j]


def self_similarity_matrix(S) -> np.ndarray:
    """Diagonal matrix holding each class's largest similarity to another class"""
    S = np.asarray(S, dtype=np.float64)
    C = S.shape[0]
    if S.shape != (C, C) or C < 2:
        raise DimensionMismatchError(f"Self-similarity needs a square matrix with C >= 2, got {S.shape}")
    off = np.where(np.eye(C, dtype=bool), -np.inf, S)
    return np.diag(off.max(axis=1))


def batch_thresholds(S, targets, indexing: Indexing = Indexing.ENTRY) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    rows = S[targets]
    if Indexing(indexing) is Indexing.ROW_PRODUCT:
        return rows @ rows.T
    return rows[:, targets]


def same_class_mask(targets) -> np.ndarray:
    targets = np.asarray(targets)
    return targets[:, None] == targets[None, :]


def cl_baseline_thresholds(targets):
    """Traditional contrastive expectations: 1 within a class, 0 across classes"""
    same = same_class_mask(targets).astype(np.float64)
    return same.copy(), same
