"""
Soft label matrices derived from a similarity prototype.

Row c of every matrix here is the label distribution used for targets of
class c. Prototypes are symmetric, so column sums and row sums coincide and
all normalizations use row sums.
"""
from dataclasses import dataclass
import logging

import numpy as np

from config import Config
from ..errors import (
    DegenerateRowError,
    DimensionMismatchError,
    InvalidConfidenceError,
    InvalidEpochError,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class SoftLabelMatrix:
    """C x C row-stochastic matrix of per-class soft labels"""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise DimensionMismatchError(f"Soft label matrix must be square, got {rows.shape}")
        if (rows < 0.0).any():
            raise DegenerateRowError("Soft label entries must be nonnegative")
        worst = float(np.max(np.abs(rows.sum(axis=1) - 1.0)))
        if worst > ROW_SUM_TOLERANCE:
            raise DegenerateRowError(f"Soft label rows must sum to 1 (worst deviation {worst:.3e})")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def C(self) -> int:
        return self.rows.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.rows).copy()

    def non_dominant_rows(self) -> np.ndarray:
        """0-based rows whose own-class entry is not the strict row maximum"""
        if self.C == 1:
            return np.empty(0, dtype=np.int64)
        off = self.rows + np.diag(np.full(self.C, -np.inf))
        return np.flatnonzero(np.diag(self.rows) <= off.max(axis=1))

    def has_dominant_diagonal(self) -> bool:
        """
        True when every row's own-class entry is its strict maximum

        Holds for every LSR matrix and for any unified matrix with sigma' > 0.5.
        Below that a class may tie with (or trail) its most similar class, as
        an all-ones prototype does at sigma' = 1/C.
        """
        return self.non_dominant_rows().size == 0

    def is_hard(self) -> bool:
        return bool(np.array_equal(self.rows, np.eye(self.C)))

    @classmethod
    def hard(cls, C: int) -> "SoftLabelMatrix":
        return cls(rows=np.eye(C))


def _square(S) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {S.shape}")
    return S


def _check_confidence(value: float, name: str = "confidence"):
    if not 0.0 < value < 1.0:
        raise InvalidConfidenceError(f"{name} must lie in (0, 1), got {value}")


def row_normalize(S) -> SoftLabelMatrix:
    """Divide each row by its own sum"""
    S = _square(S)
    sums = S.sum(axis=1)
    empty = np.flatnonzero(sums <= 0.0)
    if empty.size:
        raise DegenerateRowError(f"Row {int(empty[0]) + 1} has a non-positive sum")
    return SoftLabelMatrix(rows=S / sums[:, None])


def target_confidence(S, c: int) -> float:
    """Own-class share S[c, c] / sum_i S[i, c] of class c (0-based index)"""
    S = _square(S)
    total = S[c].sum()
    if total <= 0.0:
        raise DegenerateRowError(f"Row {c + 1} has a non-positive sum")
    return float(S[c, c] / total)


def unify_confidence(S, sigma_prime: float) -> SoftLabelMatrix:
    """Rewrite every diagonal so each normalized row puts sigma_prime on its own class"""
    _check_confidence(sigma_prime, "sigma'")
    S = _square(S)
    off_diagonal = S.sum(axis=1) - np.diag(S)
    empty = np.flatnonzero(off_diagonal <= 0.0)
    if empty.size:
        raise DegenerateRowError(
            f"Row {int(empty[0]) + 1} has no off-diagonal similarity to soften toward"
        )
    unified = S.copy()
    np.fill_diagonal(unified, sigma_prime / (1.0 - sigma_prime) * off_diagonal)
    return row_normalize(unified)


def sigma0_of(S) -> float:
    """Largest own-class confidence of the row-normalized prototype"""
    return float(row_normalize(S).diagonal().max())


@dataclass(frozen=True)
class SofteningSchedule:
    """Linear ramp of the unified confidence from sigma0 to the cap over STEP epochs"""

    sigma0: float
    step: int = Config.DEFAULT_STEP
    cap: float = Config.CONFIDENCE_CAP

    def __post_init__(self):
        _check_confidence(self.cap, "cap")
        if not 0.0 < self.sigma0 < self.cap:
            raise InvalidConfidenceError(f"sigma0 must lie in (0, {self.cap}), got {self.sigma0}")
        if self.step < 1:
            raise InvalidEpochError(f"STEP must be at least 1, got {self.step}")

    def sigma(self, epoch: int) -> float:
        if epoch < 1:
            raise InvalidEpochError(f"Epoch must be at least 1, got {epoch}")
        if epoch == 1:
            return self.sigma0
        if epoch - 1 == self.step:
            return self.cap
        return self.sigma0 + (self.cap - self.sigma0) * (epoch - 1) / self.step

    def is_hard(self, epoch: int) -> bool:
        # sigma' > cap  <=>  (epoch - 1) / STEP > 1, decided on integers
        if epoch < 1:
            raise InvalidEpochError(f"Epoch must be at least 1, got {epoch}")
        return epoch - 1 > self.step


def epoch_labels(S, epoch: int, step: int = Config.DEFAULT_STEP,
                 cap: float = Config.CONFIDENCE_CAP) -> SoftLabelMatrix:
    """Soft labels in effect at a 1-based epoch; the identity once sigma' exceeds the cap"""
    if epoch < 1:
        raise InvalidEpochError(f"Epoch must be at least 1, got {epoch}")
    S = _square(S)
    sigma0 = sigma0_of(S)
    if sigma0 >= cap:
        logger.warning(f"Prototype confidence {sigma0:.4f} already reaches the cap; using hard labels")
        return SoftLabelMatrix.hard(S.shape[0])
    schedule = SofteningSchedule(sigma0=sigma0, step=step, cap=cap)
    if schedule.is_hard(epoch):
        return SoftLabelMatrix.hard(S.shape[0])
    return unify_confidence(S, schedule.sigma(epoch))


def lsr_labels(C: int, epsilon: float) -> SoftLabelMatrix:
    """Uniform smoothing: 1 - eps + eps/C on the diagonal, eps/C elsewhere"""
    if C < 2:
        raise DimensionMismatchError(f"Label smoothing needs at least 2 classes, got {C}")
    _check_confidence(epsilon, "epsilon")
    rows = np.full((C, C), epsilon / C)
    np.fill_diagonal(rows, 1.0 - epsilon + epsilon / C)
    return SoftLabelMatrix(rows=rows)
