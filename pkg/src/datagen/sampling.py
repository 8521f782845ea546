"""
Region-tiled label map sampling and synthetic feature datasets.

Every random draw comes from a generator seeded by (seed, stream, class, index),
so any single map can be regenerated on its own and assembly order never
changes the result.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

import numpy as np
from tqdm import tqdm

from config import Config
from ..errors import GeometryError, ProfileSpecError
from ..model import FeatureDataset
from ..semantic_stats import DatasetSemanticSummary, LabelMap, summarize_label_maps
from .profiles import ClassProfile

logger = logging.getLogger(__name__)

MAP_STREAM = 0
NOISE_STREAM = 1
SPLIT_STREAM = 2


def region_grid(regions: int, width: int, height: int) -> Tuple[int, int]:
    """(rows, cols) tiling with rows * cols = regions dividing the map evenly, closest to square"""
    if width < 1 or height < 1 or regions < 1:
        raise GeometryError(f"Invalid geometry {width}x{height} with {regions} regions")
    options = [
        (rows, regions // rows)
        for rows in range(1, regions + 1)
        if regions % rows == 0 and height % rows == 0 and width % (regions // rows) == 0
    ]
    if not options:
        raise GeometryError(f"A {width}x{height} map cannot be tiled into {regions} equal regions")
    return min(options, key=lambda rc: (abs(rc[0] - rc[1]), rc[0]))


def sample_label_map(profile: ClassProfile, width: int, height: int, seed) -> LabelMap:
    """Fill each region with one label drawn from the profile's occurrence distribution"""
    rows, cols = region_grid(profile.regions, width, height)
    rng = np.random.default_rng(seed)
    grid = rng.choice(profile.L, size=(rows, cols), p=profile.occurrence) + 1
    labels = np.repeat(np.repeat(grid, height // rows, axis=0), width // cols, axis=1)
    return LabelMap(labels=labels)


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """Label maps and derived features of a synthetic scene dataset"""

    L: int
    class_names: Tuple[str, ...]
    maps: Tuple[Tuple[LabelMap, ...], ...]  # per class, per instance
    features: np.ndarray  # one row per instance, class-major order
    targets: np.ndarray  # 0-based class per row
    instance_index: np.ndarray  # within-class index per row
    train_rows: np.ndarray
    test_rows: np.ndarray
    seed: int

    @property
    def C(self) -> int:
        return len(self.class_names)

    def split_maps(self, split: str = "train") -> List[Tuple[str, List[LabelMap]]]:
        rows = self.train_rows if split == "train" else self.test_rows
        grouped = [(name, []) for name in self.class_names]
        for row in rows:
            grouped[self.targets[row]][1].append(self.maps[self.targets[row]][self.instance_index[row]])
        return grouped

    def summary(self, split: str = "train") -> DatasetSemanticSummary:
        """Class representations from one split's label maps"""
        return summarize_label_maps(self.split_maps(split), self.L)

    def to_feature_dataset(self) -> FeatureDataset:
        return FeatureDataset(
            train_features=self.features[self.train_rows],
            train_targets=self.targets[self.train_rows],
            test_features=self.features[self.test_rows],
            test_targets=self.targets[self.test_rows],
            class_names=self.class_names,
        )


def map_features(label_map: LabelMap, L: int, noise: float, distractors: int,
                 distractor_scale: float, rng: np.random.Generator) -> np.ndarray:
    """Pixel-normalized label histogram plus Gaussian noise, then distractor dimensions"""
    histogram = np.bincount(label_map.labels.ravel() - 1, minlength=L) / label_map.labels.size
    features = histogram + (rng.normal(scale=noise, size=L) if noise > 0 else 0.0)
    extra = rng.normal(scale=distractor_scale, size=distractors) if distractors else np.empty(0)
    return np.concatenate([features, extra])


def sample_dataset(
    profiles: Sequence[ClassProfile],
    per_class: int = Config.GEN_PER_CLASS,
    width: int = Config.GEN_WIDTH,
    height: int = Config.GEN_HEIGHT,
    noise: float = Config.GEN_FEATURE_NOISE,
    distractors: int = Config.GEN_DISTRACTORS,
    train_fraction: float = Config.GEN_TRAIN_FRACTION,
    seed: int = 0,
    distractor_scale: float = Config.GEN_DISTRACTOR_SCALE,
    show_progress: bool = False,
) -> SyntheticDataset:
    """
    Sample `per_class` maps per profile and derive features and a per-class train/test split

    Args:
        profiles: Class profiles sharing one label count L
        per_class: Instances per class (at least 2)
        width, height: Map geometry, tiled into each profile's regions
        noise: Standard deviation of the histogram noise
        distractors: Number of appended pure-noise dimensions
        train_fraction: Share of each class used for training
        seed: Generator seed
    """
    if per_class < 2:
        raise ProfileSpecError(f"Need at least 2 instances per class, got {per_class}")
    if not 0.0 < train_fraction < 1.0:
        raise ProfileSpecError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    L = profiles[0].L
    if any(p.L != L for p in profiles):
        raise ProfileSpecError("All profiles must share the same label count")

    maps, features, targets, instance_index = [], [], [], []
    train_rows, test_rows = [], []
    n_train = min(max(int(round(per_class * train_fraction)), 1), per_class - 1)
    for c, profile in enumerate(tqdm(profiles, desc="sampling", disable=not show_progress)):
        class_maps = []
        for n in range(per_class):
            label_map = sample_label_map(profile, width, height, [seed, MAP_STREAM, c, n])
            noise_rng = np.random.default_rng([seed, NOISE_STREAM, c, n])
            class_maps.append(label_map)
            features.append(map_features(label_map, L, noise, distractors, distractor_scale, noise_rng))
            targets.append(c)
            instance_index.append(n)
        maps.append(tuple(class_maps))

        order = np.random.default_rng([seed, SPLIT_STREAM, c]).permutation(per_class)
        base = c * per_class
        train_rows.extend(sorted(base + order[:n_train]))
        test_rows.extend(sorted(base + order[n_train:]))

    logger.info(f"Sampled {len(profiles)} x {per_class} label maps ({n_train} train per class)")
    return SyntheticDataset(
        L=L,
        class_names=tuple(p.class_name for p in profiles),
        maps=tuple(maps),
        features=np.vstack(features),
        targets=np.asarray(targets, dtype=np.int64),
        instance_index=np.asarray(instance_index, dtype=np.int64),
        train_rows=np.asarray(train_rows, dtype=np.int64),
        test_rows=np.asarray(test_rows, dtype=np.int64),
        seed=seed,
    )
