"""
Label strategies compared by the trainer: hard labels, uniform smoothing, gradient softening
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple
import logging

import numpy as np

from config import Config
from ..errors import ConfigError
from .soft_labels import (
    SofteningSchedule,
    SoftLabelMatrix,
    lsr_labels,
    sigma0_of,
    unify_confidence,
)

logger = logging.getLogger(__name__)


class EpochLabels(NamedTuple):
    labels: SoftLabelMatrix
    sigma: float
    soft: bool


class LabelStrategy(ABC):
    name: str

    @abstractmethod
    def labels_for_epoch(self, epoch: int) -> EpochLabels:
        """Label matrix, own-class confidence and soft flag for a 1-based epoch"""


@dataclass(frozen=True)
class HardLabels(LabelStrategy):
    C: int
    name: str = "hard"

    def labels_for_epoch(self, epoch: int) -> EpochLabels:
        return EpochLabels(SoftLabelMatrix.hard(self.C), 1.0, False)


@dataclass(frozen=True)
class LsrLabels(LabelStrategy):
    C: int
    epsilon: float = Config.LSR_EPSILON
    name: str = "lsr"

    def labels_for_epoch(self, epoch: int) -> EpochLabels:
        labels = lsr_labels(self.C, self.epsilon)
        return EpochLabels(labels, float(labels.rows[0, 0]), True)


class GlsLabels(LabelStrategy):
    """Prototype-derived soft labels whose confidence ramps to hard labels; the prototype is frozen"""

    name = "gls"

    def __init__(self, prototype_matrix, step: int = Config.DEFAULT_STEP,
                 cap: float = Config.CONFIDENCE_CAP):
        self.matrix = np.array(prototype_matrix, dtype=np.float64)
        self.step = step
        self.cap = cap
        sigma0 = sigma0_of(self.matrix)
        if step < 1:
            raise ConfigError(f"labels.step must be at least 1 for gls, got {step}")
        self._cache = {}
        if sigma0 >= cap:
            logger.warning(f"Prototype confidence {sigma0:.4f} reaches the cap; gls degenerates to hard labels")
            self.schedule = None
        else:
            self.schedule = SofteningSchedule(sigma0=sigma0, step=step, cap=cap)
            # later epochs only raise the diagonal, so epoch 1 is the worst case
            first = unify_confidence(self.matrix, sigma0)
            trailing = first.non_dominant_rows()
            if trailing.size:
                logger.warning(
                    f"At sigma0 {sigma0:.4f} classes {(trailing + 1).tolist()} do not lead their own "
                    f"soft label rows; own-class confidence stays on top once sigma exceeds 0.5"
                )
            self._cache[1] = first

    @property
    def sigma0(self) -> float:
        return self.schedule.sigma0 if self.schedule else 1.0

    def labels_for_epoch(self, epoch: int) -> EpochLabels:
        C = self.matrix.shape[0]
        if self.schedule is None:
            return EpochLabels(SoftLabelMatrix.hard(C), 1.0, False)
        sigma = self.schedule.sigma(epoch)
        if self.schedule.is_hard(epoch):
            return EpochLabels(SoftLabelMatrix.hard(C), sigma, False)
        if epoch not in self._cache:
            self._cache[epoch] = unify_confidence(self.matrix, sigma)
        return EpochLabels(self._cache[epoch], sigma, True)
