"""
Adam optimizer with coupled (L2) weight decay
"""
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from config import Config
from ..errors import DimensionMismatchError


@dataclass
class OptimizerState:
    learning_rate: float = Config.LEARNING_RATE
    weight_decay: float = Config.WEIGHT_DECAY
    beta1: float = Config.ADAM_BETA1
    beta2: float = Config.ADAM_BETA2
    eps: float = Config.ADAM_EPS
    step: int = 0
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)


class AdamOptimizer:
    def __init__(self, params: Sequence[np.ndarray], learning_rate: float = Config.LEARNING_RATE,
                 weight_decay: float = Config.WEIGHT_DECAY):
        self.params = list(params)
        self.state = OptimizerState(
            learning_rate=learning_rate,
            weight_decay=weight_decay,
            first_moments=[np.zeros_like(p) for p in self.params],
            second_moments=[np.zeros_like(p) for p in self.params],
        )

    def step(self, grads: Sequence[np.ndarray]):
        """Update every parameter array in place"""
        if len(grads) != len(self.params):
            raise DimensionMismatchError(f"{len(grads)} gradients for {len(self.params)} parameters")
        s = self.state
        s.step += 1
        bias1 = 1.0 - s.beta1 ** s.step
        bias2 = 1.0 - s.beta2 ** s.step
        for param, grad, m, v in zip(self.params, grads, s.first_moments, s.second_moments):
            if grad.shape != param.shape:
                raise DimensionMismatchError(f"Gradient {grad.shape} does not match parameter {param.shape}")
            g = grad + s.weight_decay * param if s.weight_decay else grad
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            param -= s.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + s.eps)
