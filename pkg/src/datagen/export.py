"""
Dataset layout on disk: PGM maps, manifest, split table and feature CSVs
"""
from pathlib import Path
from typing import Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import Config
from ..errors import IngestionError
from ..model import FeatureDataset
from ..semantic_stats import DatasetManifest, read_manifest, write_label_map, write_manifest
from ..semantic_stats.ingestion_pipeline import SPLIT_NAME
from .sampling import SyntheticDataset

logger = logging.getLogger(__name__)

TRAIN_FEATURES = "features_train.csv"
TEST_FEATURES = "features_test.csv"


def write_feature_csv(path, features: np.ndarray, targets: np.ndarray) -> Path:
    """CSV with header label,f1..fD and 1-based labels"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(features, columns=[f"f{i}" for i in range(1, features.shape[1] + 1)])
    frame.insert(0, "label", np.asarray(targets, dtype=np.int64) + 1)
    frame.to_csv(path, index=False, float_format=Config.CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def read_feature_csv(path) -> Tuple[np.ndarray, np.ndarray]:
    """(features, 0-based targets) from a label,f1..fD CSV"""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"Feature file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestionError(f"Malformed feature file {path}: {e}") from e
    expected = ["label"] + [f"f{i}" for i in range(1, frame.shape[1])]
    if list(frame.columns) != expected or frame.shape[1] < 2:
        raise IngestionError(f"Feature file {path} must have header label,f1..fD")
    features = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    if not np.isfinite(features).all():
        raise IngestionError(f"Non-finite feature value in {path}")
    return features, frame["label"].to_numpy(dtype=np.int64) - 1


def load_feature_dataset(root, class_names: Optional[Sequence[str]] = None) -> FeatureDataset:
    """Train/test features of a dataset root; class names come from its manifest when present"""
    root = Path(root)
    if class_names is None:
        class_names = read_manifest(root).class_names
    train_x, train_y = read_feature_csv(root / TRAIN_FEATURES)
    test_x, test_y = read_feature_csv(root / TEST_FEATURES)
    return FeatureDataset(train_x, train_y, test_x, test_y, tuple(class_names))


def write_dataset(dataset: SyntheticDataset, root, show_progress: bool = False) -> DatasetManifest:
    """Write the full dataset layout under root"""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(
        root=root,
        L=dataset.L,
        classes=tuple((name, len(maps)) for name, maps in zip(dataset.class_names, dataset.maps)),
    )
    for name, class_maps in tqdm(list(zip(dataset.class_names, dataset.maps)), desc="writing",
                                 disable=not show_progress):
        for k, label_map in enumerate(class_maps):
            write_label_map(label_map, manifest.map_path(name, k))
    write_manifest(manifest)

    is_train = np.zeros(dataset.targets.size, dtype=bool)
    is_train[dataset.train_rows] = True
    split = pd.DataFrame({
        "class": [dataset.class_names[t] for t in dataset.targets],
        "index": dataset.instance_index,
        "split": np.where(is_train, "train", "test"),
    })
    split.to_csv(root / SPLIT_NAME, index=False, lineterminator="\n")

    write_feature_csv(root / TRAIN_FEATURES, dataset.features[dataset.train_rows],
                      dataset.targets[dataset.train_rows])
    write_feature_csv(root / TEST_FEATURES, dataset.features[dataset.test_rows],
                      dataset.targets[dataset.test_rows])
    logger.info(f"Wrote dataset with {dataset.C} classes and {dataset.targets.size} maps to {root}")
    return manifest
