"""
Batch-level contrastive losses guided by the similarity prototype
"""
from .thresholds import (
    Indexing,
    batch_thresholds,
    cl_baseline_thresholds,
    same_class_mask,
    self_similarity_matrix,
)
from .batch_loss import (
    BatchPredictions,
    BclConfig,
    CombinedLoss,
    PairSimilarity,
    Reduction,
    ThresholdSource,
    combined_loss,
    inter_loss,
    inter_loss_matrix,
    intra_loss,
    intra_loss_matrix,
    pairwise_similarity,
    pairwise_similarity_grad,
    threshold_pair,
)
