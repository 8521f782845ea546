"""
Instance- and class-level semantic representations.

Presence counts are accumulated as integers and divided by the instance
count once, so a class representation does not depend on instance order.
"""
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from ..errors import DimensionMismatchError, EmptyClassError, LabelOutOfRangeError
from .label_map_reader import LabelMap

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class InstanceSemanticVector:
    """Binary length-L vector: entry l-1 is 1 iff label l occurs in the map"""

    values: np.ndarray

    @property
    def length(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class ClassSemanticRepresentation:
    """Fraction of a class's instances containing each label"""

    class_id: int
    class_name: str
    instance_count: int
    values: np.ndarray
    counts: np.ndarray

    @property
    def length(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class DatasetSemanticSummary:
    """Class representations of a whole dataset, in class order"""

    L: int
    representations: Tuple[ClassSemanticRepresentation, ...]

    def __post_init__(self):
        reps = tuple(self.representations)
        if not reps:
            raise EmptyClassError("A dataset summary needs at least one class")
        for expected_id, rep in enumerate(reps, start=1):
            if rep.class_id != expected_id:
                raise DimensionMismatchError(
                    f"Class ids must run 1..C without gaps, found {rep.class_id} at position {expected_id}"
                )
            if rep.length != self.L:
                raise DimensionMismatchError(
                    f"Class {rep.class_name} has {rep.length} labels, summary declares L={self.L}"
                )
        object.__setattr__(self, "representations", reps)

    @property
    def C(self) -> int:
        return len(self.representations)

    @property
    def class_names(self) -> List[str]:
        return [rep.class_name for rep in self.representations]

    def matrix(self) -> np.ndarray:
        """C x L matrix of representation values"""
        return np.vstack([rep.values for rep in self.representations])

    def to_frame(self) -> pd.DataFrame:
        columns = [f"l{i}" for i in range(1, self.L + 1)]
        frame = pd.DataFrame(self.matrix(), columns=columns)
        frame.insert(0, "N", [rep.instance_count for rep in self.representations])
        frame.insert(0, "class_name", self.class_names)
        frame.insert(0, "class_id", [rep.class_id for rep in self.representations])
        return frame


def presence_vector(label_map: LabelMap, L: int) -> InstanceSemanticVector:
    """Mark every label in [1, L] that occurs at least once in the map"""
    labels = label_map.labels
    bad = (labels < 1) | (labels > L)
    if bad.any():
        h, w = (int(i) for i in np.argwhere(bad)[0])
        where = f" in {label_map.source}" if label_map.source else ""
        raise LabelOutOfRangeError(
            f"Pixel (w={w + 1}, h={h + 1}){where} has label {int(labels[h, w])} outside [1, {L}]"
        )
    values = np.zeros(L, dtype=np.int64)
    values[np.unique(labels) - 1] = 1
    return InstanceSemanticVector(values=_frozen(values))


class PresenceAccumulator:
    """Integer presence counts for one class; merging is commutative"""

    def __init__(self, L: int):
        self.L = L
        self.counts = np.zeros(L, dtype=np.int64)
        self.instance_count = 0

    def add(self, vector: InstanceSemanticVector) -> "PresenceAccumulator":
        if vector.length != self.L:
            raise DimensionMismatchError(
                f"Presence vector of length {vector.length} does not match L={self.L}"
            )
        self.counts += vector.values
        self.instance_count += 1
        return self

    def merge(self, other: "PresenceAccumulator") -> "PresenceAccumulator":
        if other.L != self.L:
            raise DimensionMismatchError(f"Cannot merge L={other.L} counts into L={self.L}")
        self.counts += other.counts
        self.instance_count += other.instance_count
        return self

    def to_representation(self, class_id: int, class_name: str) -> ClassSemanticRepresentation:
        if self.instance_count == 0:
            raise EmptyClassError(f"Class {class_name} has no instances")
        counts = self.counts.copy()
        values = counts / self.instance_count
        return ClassSemanticRepresentation(
            class_id=class_id,
            class_name=class_name,
            instance_count=self.instance_count,
            values=_frozen(values),
            counts=_frozen(counts),
        )


def class_representation(
    class_id: int,
    class_name: str,
    vectors: Sequence[InstanceSemanticVector],
) -> ClassSemanticRepresentation:
    """Elementwise mean of a class's presence vectors"""
    if not vectors:
        raise EmptyClassError(f"Class {class_name} has no instances")
    accumulator = PresenceAccumulator(vectors[0].length)
    for vector in vectors:
        accumulator.add(vector)
    return accumulator.to_representation(class_id, class_name)


def summarize_label_maps(
    classes: Iterable[Tuple[str, Sequence[LabelMap]]],
    L: int,
) -> DatasetSemanticSummary:
    """Summary of in-memory label maps, one (class_name, maps) entry per class"""
    representations = []
    for class_id, (class_name, maps) in enumerate(classes, start=1):
        vectors = [presence_vector(label_map, L) for label_map in maps]
        representations.append(class_representation(class_id, class_name, vectors))
    return DatasetSemanticSummary(L=L, representations=tuple(representations))
