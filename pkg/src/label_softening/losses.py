"""
Cross-entropy against per-class soft labels
"""
from typing import Tuple

import numpy as np
from scipy.special import log_softmax

from ..errors import DimensionMismatchError, NumericError
from .soft_labels import SoftLabelMatrix


def check_targets(targets, C: int) -> np.ndarray:
    """0-based integer class indices, each in [0, C)"""
    targets = np.asarray(targets)
    if targets.ndim != 1 or not np.issubdtype(targets.dtype, np.integer):
        raise DimensionMismatchError("Targets must be a 1-D array of class indices")
    if targets.size and (targets.min() < 0 or targets.max() >= C):
        raise DimensionMismatchError(f"Target outside [1, {C}]")
    return targets.astype(np.int64)


def soft_cross_entropy(logits, targets, labels: SoftLabelMatrix) -> Tuple[float, np.ndarray]:
    """
    Mean soft-label cross-entropy of a batch and its gradient w.r.t. the logits

    Args:
        logits: B x C pre-softmax scores
        targets: B class indices (0-based)
        labels: Soft label matrix; row targets[i] is sample i's target distribution

    Returns:
        (loss, dloss/dlogits)
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(logits).all():
        raise NumericError("Non-finite logits in cross-entropy")
    B, C = logits.shape
    if labels.C != C:
        raise DimensionMismatchError(f"Logits have {C} classes, soft labels {labels.C}")
    targets = check_targets(targets, C)
    if targets.shape[0] != B:
        raise DimensionMismatchError(f"{B} logit rows but {targets.shape[0]} targets")

    log_p = log_softmax(logits, axis=1)
    soft = labels.rows[targets]
    # 0 * log p contributes nothing even where p underflows
    loss = -float(np.sum(np.where(soft > 0.0, soft * log_p, 0.0))) / B
    grad = (np.exp(log_p) - soft) / B
    return loss, grad
