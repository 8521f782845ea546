"""
Feed-forward classifier with rectifier hidden layers and analytic backpropagation
"""
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DimensionMismatchError, NumericError, UnsupportedModelError


def relu(x):
    return np.maximum(x, 0.0)


class MlpClassifier:
    """Layer dims (input, hidden..., C); logits = a_k @ W_k + b_k"""

    def __init__(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]):
        if not weights or len(weights) != len(biases):
            raise DimensionMismatchError("An MLP needs matching, non-empty weight and bias lists")
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64).reshape(-1) for b in biases]
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != b.shape[0]:
                raise DimensionMismatchError(f"Layer {k + 1}: weight {w.shape} and bias {b.shape} disagree")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise DimensionMismatchError(f"Layer {k + 1} input does not match layer {k} output")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NumericError(f"Layer {k + 1} holds non-finite parameters")

    @classmethod
    def initialize(cls, layer_dims: Sequence[int], seed: int) -> "MlpClassifier":
        """Uniform fan-in scaled weights, zero biases"""
        if len(layer_dims) < 2 or min(layer_dims) < 1:
            raise DimensionMismatchError(f"Invalid layer dims {list(layer_dims)}")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def layer_dims(self) -> List[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[1]

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in (W1, b1, W2, b2, ...) order; updated in place by optimizers"""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def copy(self) -> "MlpClassifier":
        return MlpClassifier([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def _check_input(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.layer_dims[0]:
            raise DimensionMismatchError(
                f"Expected features of width {self.layer_dims[0]}, got shape {features.shape}"
            )
        return features

    def forward_cache(self, features) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Logits plus the input of every layer (features, then each hidden activation)"""
        activation = self._check_input(features)
        inputs = []
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(activation)
            z = activation @ w + b
            activation = z if k == last else relu(z)
        return activation, inputs

    def forward(self, features) -> np.ndarray:
        return self.forward_cache(features)[0]

    def backward(self, inputs: List[np.ndarray], grad_logits) -> List[np.ndarray]:
        """Parameter gradients (same order as parameters()) from dL/dlogits"""
        grads = [None] * (2 * len(self.weights))
        delta = np.asarray(grad_logits, dtype=np.float64)
        for k in range(len(self.weights) - 1, -1, -1):
            grads[2 * k] = inputs[k].T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            if k:
                # inputs[k] = relu(z_{k-1}); its derivative is 1 where the unit is active
                delta = (delta @ self.weights[k].T) * (inputs[k] > 0.0)
        return grads

    def penultimate(self, features) -> np.ndarray:
        """Activations feeding the output layer"""
        if len(self.weights) < 2:
            raise UnsupportedModelError("Embeddings need at least one hidden layer")
        return self.forward_cache(features)[1][-1]
