"""
Synthetic scene class profiles with controlled object-occurrence overlap
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from config import Config
from ..errors import ProfileSpecError

logger = logging.getLogger(__name__)

PairSpec = Tuple[int, int, float]  # (class a, class b, shared fraction), 0-based classes


@dataclass(frozen=True, eq=False)
class ClassProfile:
    """Per-region label distribution of one synthetic scene class"""

    class_id: int
    class_name: str
    occurrence: np.ndarray
    regions: int = Config.GEN_REGIONS

    def __post_init__(self):
        occurrence = np.array(self.occurrence, dtype=np.float64)
        if occurrence.ndim != 1 or (occurrence < 0).any() or (occurrence > 1).any():
            raise ProfileSpecError(f"Profile {self.class_name}: probabilities must lie in [0, 1]")
        if abs(occurrence.sum() - 1.0) > 1e-9:
            raise ProfileSpecError(f"Profile {self.class_name}: probabilities sum to {occurrence.sum()}")
        if self.regions < 1:
            raise ProfileSpecError(f"Profile {self.class_name}: regions must be >= 1")
        occurrence.setflags(write=False)
        object.__setattr__(self, "occurrence", occurrence)

    @property
    def L(self) -> int:
        return self.occurrence.shape[0]


def parse_pair_specs(entries: Sequence[str]) -> List[PairSpec]:
    """'1-2:0.8' style entries (1-based classes) to 0-based pair specs"""
    pairs = []
    for entry in entries:
        try:
            classes, fraction = entry.split(":")
            a, b = (int(x) - 1 for x in classes.split("-"))
            pairs.append((a, b, float(fraction)))
        except ValueError as e:
            raise ProfileSpecError(f"Malformed pair spec {entry!r}; expected '<a>-<b>:<fraction>'") from e
    return pairs


def overlap(p, q) -> float:
    """Shared occurrence mass of two profiles"""
    return float(np.minimum(p, q).sum())


def overlap_matrix(profiles: Sequence[ClassProfile]) -> np.ndarray:
    C = len(profiles)
    matrix = np.eye(C)
    for i in range(C):
        for j in range(i + 1, C):
            matrix[i, j] = matrix[j, i] = overlap(profiles[i].occurrence, profiles[j].occurrence)
    return matrix


def make_confusable_profiles(
    C: int,
    L: int,
    pairs: Sequence[PairSpec] = (),
    seed: int = 0,
    regions: int = Config.GEN_REGIONS,
    class_names: Optional[Sequence[str]] = None,
    background: float = 0.0,
) -> List[ClassProfile]:
    """
    Profiles where each listed pair shares the given fraction of occurrence mass

    Every class owns a private block of labels and every listed pair owns a
    shared block. A nonzero `background` adds one block all classes draw from
    with that mass, so unlisted pairs overlap by exactly `background` and
    listed pairs by their own fraction (which must then be at least `background`).

    Raises:
        ProfileSpecError: bad indices, a class sharing more than all its mass,
            or more label blocks than labels
    """
    if C < 2 or L < C:
        raise ProfileSpecError(f"Need C >= 2 and L >= C, got C={C}, L={L}")
    if not 0.0 <= background < 1.0:
        raise ProfileSpecError(f"Background mass {background} outside [0, 1)")
    names = list(class_names) if class_names is not None else [f"scene_{c:02d}" for c in range(1, C + 1)]
    if len(names) != C:
        raise ProfileSpecError(f"{len(names)} class names for {C} classes")

    shared = np.full(C, background)
    seen = set()
    for a, b, fraction in pairs:
        if not (0 <= a < C and 0 <= b < C) or a == b:
            raise ProfileSpecError(f"Invalid class pair ({a + 1}, {b + 1}) for C={C}")
        if not background <= fraction <= 1.0:
            raise ProfileSpecError(
                f"Shared fraction {fraction} for pair ({a + 1}, {b + 1}) outside [{background}, 1]")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ProfileSpecError(f"Pair ({a + 1}, {b + 1}) listed twice")
        seen.add(key)
        shared[a] += fraction - background
        shared[b] += fraction - background
    over = np.flatnonzero(shared > 1.0 + 1e-12)
    if over.size:
        raise ProfileSpecError(f"Class {int(over[0]) + 1} shares {shared[over[0]]:.3f} > 1 of its mass")

    # class -> mass maps, one per label block; blocks with no mass get no labels
    blocks: List[Dict[int, float]] = []
    for c in range(C):
        if 1.0 - shared[c] > 1e-12:
            blocks.append({c: 1.0 - shared[c]})
    for a, b, fraction in pairs:
        if fraction - background > 0.0:
            blocks.append({a: fraction - background, b: fraction - background})
    if background > 0.0:
        blocks.append({c: background for c in range(C)})
    if len(blocks) > L:
        raise ProfileSpecError(f"{len(blocks)} label blocks do not fit into L={L} labels")

    rng = np.random.default_rng(seed)
    sizes = np.full(len(blocks), L // len(blocks))
    sizes[: L % len(blocks)] += 1
    occurrence = np.zeros((C, L))
    start = 0
    for block, size in zip(blocks, sizes):
        weights = rng.dirichlet(np.ones(size))
        for c, mass in block.items():
            occurrence[c, start:start + size] += mass * weights
        start += size

    profiles = [
        ClassProfile(class_id=c + 1, class_name=names[c], occurrence=occurrence[c] / occurrence[c].sum(),
                     regions=regions)
        for c in range(C)
    ]
    logger.info(f"Generated {C} class profiles over {L} labels with {len(seen)} confusable pairs")
    return profiles
