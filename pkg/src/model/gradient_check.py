"""
Central finite-difference verification of the composite loss gradients.

The relative error of a case is the largest elementwise
|analytic - numeric| / max(|analytic|, |numeric|, floor), where the floor is a
fixed fraction of the largest gradient magnitude. The norm ratio
|analytic - numeric|_2 / max(|analytic|_2, |numeric|_2) is reported alongside.
"""
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import Config
from ..contrastive import (
    BatchPredictions,
    BclConfig,
    Indexing,
    PairSimilarity,
    Reduction,
    combined_loss,
)
from ..label_softening import GlsLabels, HardLabels, SoftLabelMatrix
from .mlp import MlpClassifier
from .trainer import loss_and_grad

logger = logging.getLogger(__name__)

BATCH_SIZES = (2, 8)
CLASS_COUNTS = (3, 7)
FEATURE_DIM = 4
HIDDEN_WIDTH = 5


@dataclass(frozen=True)
class GradcheckCase:
    strategy: str  # "hard" or "gls"
    bcl: Optional[BclConfig] = None

    @property
    def label(self) -> str:
        if self.bcl is None:
            return f"{self.strategy}/ce_only"
        return (f"{self.strategy}/{self.bcl.indexing.value}/{self.bcl.similarity.value}/"
                f"{self.bcl.reduction.value}/{self.bcl.thresholds.value}")


@dataclass(eq=False)
class GradcheckReport:
    cases: pd.DataFrame
    summary: pd.DataFrame

    @property
    def max_error(self) -> float:
        return float(self.cases[["logit_error", "param_error"]].max().max()) if len(self.cases) else 0.0

    def max_error_where(self, **axes) -> float:
        frame = self.cases
        for column, value in axes.items():
            frame = frame[frame[column] == value]
        return float(frame[["logit_error", "param_error"]].max().max())


def default_cases() -> List[GradcheckCase]:
    """CE-only plus every indexing x similarity x reduction combination, for hard and gls labels"""
    cases = []
    for strategy in ("hard", "gls"):
        cases.append(GradcheckCase(strategy))
        for indexing, similarity, reduction in product(Indexing, PairSimilarity, Reduction):
            cases.append(GradcheckCase(strategy, BclConfig(indexing, similarity, reduction)))
    return cases


RELATIVE_FLOOR = 1e-2  # of the largest |component|


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: Optional[float] = None) -> float:
    """Worst elementwise relative error; components far below the largest one are judged against the floor"""
    analytic = np.ravel(analytic)
    numeric = np.ravel(numeric)
    largest = max(float(np.max(np.abs(analytic), initial=0.0)), float(np.max(np.abs(numeric), initial=0.0)))
    if largest == 0.0:
        return 0.0
    floor = RELATIVE_FLOOR * largest if floor is None else floor
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    diff = np.abs(analytic - numeric)
    return float(np.max(np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0.0)))


def norm_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.ravel(analytic)
    numeric = np.ravel(numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def random_prototype(C: int, rng: np.random.Generator) -> np.ndarray:
    upper = rng.uniform(0.05, 0.95, size=(C, C))
    matrix = np.triu(upper, 1)
    matrix = matrix + matrix.T
    np.fill_diagonal(matrix, 1.0)
    return matrix


def _labels_for(case: GradcheckCase, prototype: np.ndarray, rng: np.random.Generator) -> SoftLabelMatrix:
    if case.strategy == "gls":
        step = 5
        return GlsLabels(prototype, step=step).labels_for_epoch(int(rng.integers(1, step + 2))).labels
    return HardLabels(prototype.shape[0]).labels_for_epoch(1).labels


def numeric_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central differences of scalar f with respect to array x (perturbed in place)"""
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + h
        plus = f()
        x[index] = original - h
        minus = f()
        x[index] = original
        grad[index] = (plus - minus) / (2.0 * h)
    return grad


def check_instance(case: GradcheckCase, rng: np.random.Generator,
                   h: float = Config.GRADCHECK_STEP) -> Dict[str, float]:
    """Logit-level and parameter-level errors of one random instance, with its batch size and class count"""
    B = int(rng.choice(BATCH_SIZES))
    C = int(rng.choice(CLASS_COUNTS))
    prototype = random_prototype(C, rng)
    labels = _labels_for(case, prototype, rng)
    targets = rng.integers(0, C, size=B)

    logits = rng.normal(size=(B, C))
    analytic = combined_loss(BatchPredictions(logits, targets), labels, prototype, case.bcl).grad
    numeric_logits = numeric_gradient(
        lambda: combined_loss(BatchPredictions(logits, targets), labels, prototype, case.bcl).loss,
        logits,
        h,
    )

    model = MlpClassifier.initialize([FEATURE_DIM, HIDDEN_WIDTH, C], int(rng.integers(2**31)))
    for bias in model.biases:
        bias += rng.normal(scale=0.1, size=bias.shape)
    features = rng.normal(size=(B, FEATURE_DIM))
    _, grads = loss_and_grad(model, features, targets, labels, prototype, case.bcl)
    param_errors = []
    for param, grad in zip(model.parameters(), grads):
        numeric = numeric_gradient(
            lambda: loss_and_grad(model, features, targets, labels, prototype, case.bcl)[0].loss,
            param,
            h,
        )
        param_errors.append((grad, numeric))
    analytic_params = np.concatenate([g.ravel() for g, _ in param_errors])
    numeric_params = np.concatenate([n.ravel() for _, n in param_errors])
    return {
        "B": B,
        "C": C,
        "logit_error": relative_error(analytic, numeric_logits),
        "param_error": relative_error(analytic_params, numeric_params),
        "logit_norm_error": norm_relative_error(analytic, numeric_logits),
        "param_norm_error": norm_relative_error(analytic_params, numeric_params),
    }


def gradient_check(
    cases: Optional[Sequence[GradcheckCase]] = None,
    trials: int = 1,
    seed: int = 0,
    h: float = Config.GRADCHECK_STEP,
    show_progress: bool = False,
) -> GradcheckReport:
    """
    Run every case on `trials` random small instances

    Returns:
        GradcheckReport with one row per (case, trial) and the worst error per axis value
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    cases = list(cases) if cases is not None else default_cases()
    rng = np.random.default_rng(seed)
    rows = []
    for case in tqdm(cases, desc="gradcheck", disable=not show_progress):
        for trial in range(trials):
            errors = check_instance(case, rng, h)
            rows.append({
                "case": case.label,
                "trial": trial,
                "strategy": case.strategy,
                "indexing": case.bcl.indexing.value if case.bcl else "none",
                "similarity": case.bcl.similarity.value if case.bcl else "none",
                "reduction": case.bcl.reduction.value if case.bcl else "none",
                **errors,
            })
    frame = pd.DataFrame(rows)
    frame["worst"] = frame[["logit_error", "param_error"]].max(axis=1)

    summary = []
    for axis in ("strategy", "indexing", "similarity", "reduction"):
        for value, group in frame.groupby(axis, sort=True):
            summary.append({"axis": axis, "value": value, "cases": len(group),
                            "max_relative_error": float(group["worst"].max())})
    summary = pd.DataFrame(summary, columns=["axis", "value", "cases", "max_relative_error"])
    logger.info(f"Gradient check: {len(frame)} instances, worst relative error {frame['worst'].max():.3e}")
    return GradcheckReport(cases=frame, summary=summary)
