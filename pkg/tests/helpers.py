import numpy as np

from src.semantic_stats import ClassSemanticRepresentation, DatasetSemanticSummary


def random_prototype(rng: np.random.Generator, C: int) -> np.ndarray:
    """Symmetric matrix with unit diagonal and off-diagonals in (0.05, 0.95)"""
    upper = np.triu(rng.uniform(0.05, 0.95, size=(C, C)), 1)
    matrix = upper + upper.T
    np.fill_diagonal(matrix, 1.0)
    return matrix


def make_summary(values, names=None) -> DatasetSemanticSummary:
    """Summary with the given representation rows (N=1, counts unused)"""
    values = np.asarray(values, dtype=np.float64)
    names = names or [f"class_{c}" for c in range(1, values.shape[0] + 1)]
    reps = tuple(
        ClassSemanticRepresentation(
            class_id=c + 1, class_name=names[c], instance_count=1, values=values[c], counts=values[c],
        )
        for c in range(values.shape[0])
    )
    return DatasetSemanticSummary(L=values.shape[1], representations=reps)
