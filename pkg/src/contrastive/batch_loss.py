"""
Batch-level contrastive loss on logits, combined with soft-label cross-entropy.

p_matrix is computed on pre-softmax logits. Hinges use subgradient 0 at a tie.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple
import logging

import numpy as np

from ..errors import DegenerateRowError, DimensionMismatchError, NumericError
from ..label_softening import SoftLabelMatrix, check_targets, soft_cross_entropy
from .thresholds import (
    Indexing,
    batch_thresholds,
    cl_baseline_thresholds,
    self_similarity_matrix,
)

logger = logging.getLogger(__name__)


class PairSimilarity(str, Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


class Reduction(str, Enum):
    MEAN_INTER = "mean_inter"
    NONZERO_INTER_INTRA = "nonzero_inter_intra"
    MEAN_INTER_INTRA = "mean_inter_intra"
    NONZERO_INTER = "nonzero_inter"

    @property
    def nonzero(self) -> bool:
        return self.value.startswith("nonzero")

    @property
    def with_intra(self) -> bool:
        return self.value.endswith("intra")


class ThresholdSource(str, Enum):
    PROTOTYPE = "bcl"
    TRADITIONAL = "cl"


@dataclass(frozen=True)
class BclConfig:
    indexing: Indexing = Indexing.ENTRY
    similarity: PairSimilarity = PairSimilarity.COSINE
    reduction: Reduction = Reduction.MEAN_INTER_INTRA
    thresholds: ThresholdSource = ThresholdSource.PROTOTYPE
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "indexing", Indexing(self.indexing))
        object.__setattr__(self, "similarity", PairSimilarity(self.similarity))
        object.__setattr__(self, "reduction", Reduction(self.reduction))
        object.__setattr__(self, "thresholds", ThresholdSource(self.thresholds))


@dataclass(frozen=True, eq=False)
class BatchPredictions:
    logits: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        if logits.ndim != 2:
            raise DimensionMismatchError(f"Logits must be B x C, got shape {logits.shape}")
        if not np.isfinite(logits).all():
            raise NumericError("Non-finite logits in batch")
        targets = check_targets(self.targets, logits.shape[1])
        if targets.shape[0] != logits.shape[0]:
            raise DimensionMismatchError(f"{logits.shape[0]} logit rows but {targets.shape[0]} targets")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "targets", targets)

    @property
    def B(self) -> int:
        return self.logits.shape[0]

    @property
    def C(self) -> int:
        return self.logits.shape[1]


def _nonzero_flag(reduction) -> bool:
    if isinstance(reduction, Reduction):
        return reduction.nonzero
    if reduction not in ("mean", "nonzero"):
        raise ValueError(f"Unknown reduction {reduction!r}")
    return reduction == "nonzero"


def _unit_rows(logits: np.ndarray, allow_zero_rows: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Row norms and unit rows; a zero row stays zero when allowed"""
    norms = np.linalg.norm(logits, axis=1)
    empty = np.flatnonzero(norms == 0.0)
    if empty.size and not allow_zero_rows:
        raise DegenerateRowError(f"Logit row {int(empty[0]) + 1} has zero norm")
    unit = np.divide(logits, norms[:, None], out=np.zeros_like(logits), where=norms[:, None] > 0.0)
    return norms, unit


def pairwise_similarity(logits, similarity: PairSimilarity = PairSimilarity.COSINE,
                        allow_zero_rows: bool = False) -> np.ndarray:
    """
    B x B similarity of logit rows: cosine, or exp(-euclidean distance)

    With `allow_zero_rows`, an all-zero row has cosine 0 to every other row
    instead of raising.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if PairSimilarity(similarity) is PairSimilarity.COSINE:
        _, unit = _unit_rows(logits, allow_zero_rows)
        p_matrix = np.clip(unit @ unit.T, -1.0, 1.0)
        np.fill_diagonal(p_matrix, 1.0)
        return p_matrix
    diff = logits[:, None, :] - logits[None, :, :]
    return np.exp(-np.sqrt(np.sum(diff * diff, axis=2)))


def pairwise_similarity_grad(logits, similarity: PairSimilarity, upstream) -> np.ndarray:
    """Chain a dL/dp_matrix upstream gradient back to the logits; zero rows get zero gradient"""
    logits = np.asarray(logits, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if PairSimilarity(similarity) is PairSimilarity.COSINE:
        norms, unit = _unit_rows(logits, allow_zero_rows=True)
        # the diagonal is pinned to 1 and carries no gradient
        g = upstream - np.diag(np.diag(upstream))
        d_unit = (g + g.T) @ unit
        radial = np.sum(d_unit * unit, axis=1, keepdims=True)
        tangent = d_unit - radial * unit
        return np.divide(tangent, norms[:, None], out=np.zeros_like(tangent), where=norms[:, None] > 0.0)
    diff = logits[:, None, :] - logits[None, :, :]
    distance = np.sqrt(np.sum(diff * diff, axis=2))
    d_distance = -upstream * np.exp(-distance)
    sym = d_distance + d_distance.T
    weights = np.divide(sym, distance, out=np.zeros_like(sym), where=distance > 0.0)
    return weights.sum(axis=1)[:, None] * logits - weights @ logits


def _reduce(matrix: np.ndarray, nonzero: bool) -> Tuple[float, np.ndarray]:
    """Reduced value and d value / d matrix (positive support only)"""
    positive = matrix > 0.0
    if nonzero:
        count = int(positive.sum())
        if count == 0:
            return 0.0, np.zeros_like(matrix)
        return float(matrix.sum() / count), positive / count
    return float(matrix.sum() / matrix.size), positive / matrix.size


def inter_loss_matrix(p_matrix, thresholds) -> np.ndarray:
    return np.maximum(np.asarray(p_matrix) - np.asarray(thresholds), 0.0)


def intra_loss_matrix(p_matrix, intra_thresholds) -> np.ndarray:
    return np.maximum(np.asarray(intra_thresholds) - np.asarray(p_matrix), 0.0)


def inter_loss(p_matrix, thresholds, reduction="mean") -> float:
    """Hinge on predicted similarities exceeding their thresholds"""
    p_matrix = np.asarray(p_matrix, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if p_matrix.shape != thresholds.shape:
        raise DimensionMismatchError(f"Shapes {p_matrix.shape} and {thresholds.shape} differ")
    return _reduce(inter_loss_matrix(p_matrix, thresholds), _nonzero_flag(reduction))[0]


def intra_loss(p_matrix, intra_thresholds, reduction="mean") -> float:
    """Hinge on predicted similarities falling short of their thresholds"""
    p_matrix = np.asarray(p_matrix, dtype=np.float64)
    intra_thresholds = np.asarray(intra_thresholds, dtype=np.float64)
    if p_matrix.shape != intra_thresholds.shape:
        raise DimensionMismatchError(f"Shapes {p_matrix.shape} and {intra_thresholds.shape} differ")
    return _reduce(intra_loss_matrix(p_matrix, intra_thresholds), _nonzero_flag(reduction))[0]


@dataclass(frozen=True, eq=False)
class CombinedLoss:
    loss: float
    grad: np.ndarray
    ce: float
    inter: float
    intra: float


def threshold_pair(S, targets, config: BclConfig):
    """(inter, intra) B x B thresholds for a batch"""
    if config.thresholds is ThresholdSource.TRADITIONAL:
        return cl_baseline_thresholds(targets)
    inter_t = batch_thresholds(S, targets, config.indexing)
    intra_t = batch_thresholds(self_similarity_matrix(S), targets, config.indexing)
    return inter_t, intra_t


def combined_loss(
    batch: BatchPredictions,
    labels: SoftLabelMatrix,
    S=None,
    config: Optional[BclConfig] = None,
) -> CombinedLoss:
    """
    Soft cross-entropy plus the weighted contrastive hinge terms

    Args:
        batch: Logits and 0-based targets
        labels: Soft labels in effect for this epoch
        S: C x C prototype matrix (unused for traditional thresholds or when config is None)
        config: Contrastive settings; None means cross-entropy only

    Returns:
        CombinedLoss with the exact gradient of the composite w.r.t. the logits
    """
    ce, grad = soft_cross_entropy(batch.logits, batch.targets, labels)
    if config is None:
        return CombinedLoss(loss=ce, grad=grad, ce=ce, inter=0.0, intra=0.0)

    if config.thresholds is ThresholdSource.PROTOTYPE:
        S = getattr(S, "matrix", S)
        if S is None or np.shape(S) != (batch.C, batch.C):
            raise DimensionMismatchError(f"Contrastive loss needs a {batch.C} x {batch.C} prototype")
    inter_t, intra_t = threshold_pair(S, batch.targets, config)
    p_matrix = pairwise_similarity(batch.logits, config.similarity, allow_zero_rows=True)
    nonzero = config.reduction.nonzero

    inter, d_p = _reduce(inter_loss_matrix(p_matrix, inter_t), nonzero)
    intra = 0.0
    if config.reduction.with_intra:
        intra, d_intra = _reduce(intra_loss_matrix(p_matrix, intra_t), nonzero)
        d_p = d_p - d_intra

    weight = config.weight
    grad = grad + weight * pairwise_similarity_grad(batch.logits, config.similarity, d_p)
    loss = ce + weight * (inter + intra)
    if not np.isfinite(loss) or not np.isfinite(grad).all():
        raise NumericError("Non-finite composite loss or gradient")
    return CombinedLoss(loss=loss, grad=grad, ce=ce, inter=inter, intra=intra)
