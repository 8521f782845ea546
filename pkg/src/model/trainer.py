"""
Training loop wiring label strategies and contrastive terms into Adam updates
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import logging
import time

import numpy as np
import pandas as pd

from config import Config
from ..contrastive import BatchPredictions, BclConfig, CombinedLoss, ThresholdSource, combined_loss
from ..errors import ConfigError, DimensionMismatchError, EmptyDatasetError
from ..label_softening import LabelStrategy, SoftLabelMatrix
from .mlp import MlpClassifier
from .optimizer import AdamOptimizer

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Train/test feature matrices with 0-based class targets"""

    train_features: np.ndarray
    train_targets: np.ndarray
    test_features: np.ndarray
    test_targets: np.ndarray
    class_names: Tuple[str, ...]

    def __post_init__(self):
        for prefix in ("train", "test"):
            x = np.asarray(getattr(self, f"{prefix}_features"), dtype=np.float64)
            y = np.asarray(getattr(self, f"{prefix}_targets"), dtype=np.int64)
            if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
                raise DimensionMismatchError(f"{prefix} split: {x.shape} features for {y.shape} targets")
            if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
                raise DimensionMismatchError(f"{prefix} split holds a target outside the class list")
            object.__setattr__(self, f"{prefix}_features", x)
            object.__setattr__(self, f"{prefix}_targets", y)
        if self.train_features.shape[1] != self.test_features.shape[1]:
            raise DimensionMismatchError("Train and test features differ in width")
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def feature_dim(self) -> int:
        return self.train_features.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    strategy: LabelStrategy
    bcl: Optional[BclConfig] = None
    prototype: Optional[np.ndarray] = field(default=None, compare=False)
    epochs: int = Config.EPOCHS
    batch_size: int = Config.BATCH_SIZE
    learning_rate: float = Config.LEARNING_RATE
    weight_decay: float = Config.WEIGHT_DECAY
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError(f"epochs must be >= 0 and batch_size >= 1, got {self.epochs}, {self.batch_size}")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ConfigError("learning_rate must be positive and weight_decay nonnegative")
        if self.bcl is not None and self.bcl.thresholds is ThresholdSource.PROTOTYPE and self.prototype is None:
            raise ConfigError("Prototype-guided contrastive loss needs a prototype")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    sigma: float
    soft: bool
    ce: float
    inter: float
    intra: float
    loss: float
    train_accuracy: float
    test_accuracy: float


@dataclass(eq=False)
class TrainReport:
    records: List[EpochRecord]
    test_accuracy: float
    confusion: np.ndarray
    wall_clock_seconds: float

    def to_frame(self) -> pd.DataFrame:
        columns = list(EpochRecord.__dataclass_fields__)
        return pd.DataFrame([r.__dict__ for r in self.records], columns=columns)


def loss_and_grad(
    model: MlpClassifier,
    features,
    targets,
    labels: SoftLabelMatrix,
    prototype=None,
    bcl: Optional[BclConfig] = None,
) -> Tuple[CombinedLoss, List[np.ndarray]]:
    """Composite loss of one batch and its parameter gradients"""
    logits, inputs = model.forward_cache(features)
    result = combined_loss(BatchPredictions(logits, targets), labels, prototype, bcl)
    return result, model.backward(inputs, result.grad)


def evaluate(model: MlpClassifier, features, targets) -> Tuple[float, np.ndarray]:
    """Accuracy and C x C confusion matrix (rows true, columns predicted)"""
    targets = np.asarray(targets, dtype=np.int64)
    if targets.size == 0:
        raise EmptyDatasetError("Cannot evaluate an empty split")
    # argmax keeps the lowest index on ties
    predictions = np.argmax(model.forward(features), axis=1)
    C = model.num_classes
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (targets, predictions), 1)
    return float(np.trace(confusion) / targets.size), confusion


def export_embeddings(model: MlpClassifier, features, targets) -> pd.DataFrame:
    """One row per sample: 1-based label then penultimate activations"""
    embedding = model.penultimate(features)
    frame = pd.DataFrame(embedding, columns=[f"e{i}" for i in range(1, embedding.shape[1] + 1)])
    frame.insert(0, "label", np.asarray(targets, dtype=np.int64) + 1)
    return frame


def batch_order(n: int, seed: int, epoch: int, shuffle: bool) -> np.ndarray:
    """Sample order of an epoch; depends only on (seed, epoch) so strategies share batches"""
    if not shuffle:
        return np.arange(n)
    return np.random.default_rng([seed, epoch]).permutation(n)


def train(model: MlpClassifier, dataset: FeatureDataset, config: TrainConfig) -> TrainReport:
    """
    Train in place and report per-epoch losses and accuracies

    Args:
        model: Network to update
        dataset: Train/test features
        config: Strategy, optional contrastive settings and optimizer hyperparameters

    Returns:
        TrainReport; identical for identical seeds and configs
    """
    n = dataset.train_targets.size
    if n == 0 or dataset.test_targets.size == 0:
        raise EmptyDatasetError("Training needs non-empty train and test splits")
    if model.num_classes != dataset.num_classes or model.layer_dims[0] != dataset.feature_dim:
        raise DimensionMismatchError(
            f"Model dims {model.layer_dims} do not fit {dataset.feature_dim} features / {dataset.num_classes} classes"
        )

    start_time = time.perf_counter()
    optimizer = AdamOptimizer(model.parameters(), config.learning_rate, config.weight_decay)
    records = []

    for epoch in range(1, config.epochs + 1):
        labels, sigma, soft = config.strategy.labels_for_epoch(epoch)
        order = batch_order(n, config.seed, epoch, config.shuffle)
        totals = np.zeros(4)
        batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            result, grads = loss_and_grad(
                model,
                dataset.train_features[idx],
                dataset.train_targets[idx],
                labels,
                config.prototype,
                config.bcl,
            )
            optimizer.step(grads)
            totals += (result.ce, result.inter, result.intra, result.loss)
            batches += 1

        ce, inter, intra, loss = totals / batches
        train_accuracy, _ = evaluate(model, dataset.train_features, dataset.train_targets)
        test_accuracy, _ = evaluate(model, dataset.test_features, dataset.test_targets)
        records.append(EpochRecord(epoch, sigma, soft, ce, inter, intra, loss, train_accuracy, test_accuracy))
        logger.info(
            f"Epoch {epoch}/{config.epochs} [{config.strategy.name}] sigma={sigma:.4f} "
            f"loss={loss:.5f} (ce={ce:.5f} inter={inter:.5f} intra={intra:.5f}) "
            f"train_acc={train_accuracy:.4f} test_acc={test_accuracy:.4f}"
        )

    test_accuracy, confusion = evaluate(model, dataset.test_features, dataset.test_targets)
    return TrainReport(
        records=records,
        test_accuracy=test_accuracy,
        confusion=confusion,
        wall_clock_seconds=time.perf_counter() - start_time,
    )
