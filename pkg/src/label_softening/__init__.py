"""
Label softening: prototype-derived soft labels, their schedule, and the LSR baseline
"""
from .soft_labels import (
    SofteningSchedule,
    SoftLabelMatrix,
    epoch_labels,
    lsr_labels,
    row_normalize,
    sigma0_of,
    target_confidence,
    unify_confidence,
)
from .losses import check_targets, soft_cross_entropy
from .strategies import EpochLabels, GlsLabels, HardLabels, LabelStrategy, LsrLabels
