"""
Desk-scale classifier, optimizer, trainer and gradient verification
"""
from .mlp import MlpClassifier
from .optimizer import AdamOptimizer, OptimizerState
from .trainer import (
    EpochRecord,
    FeatureDataset,
    TrainConfig,
    TrainReport,
    batch_order,
    evaluate,
    export_embeddings,
    loss_and_grad,
    train,
)
from .gradient_check import (
    GradcheckCase,
    GradcheckReport,
    default_cases,
    gradient_check,
    norm_relative_error,
    numeric_gradient,
    relative_error,
)
