"""
Shared fixtures and hypothesis profiles
"""
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from src.semantic_stats import DatasetManifest, LabelMap, write_label_map, write_manifest

settings.register_profile("dev", max_examples=50, deadline=None)
settings.register_profile(
    "ci", max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def toy_maps():
    """Two classes with two 2x2 maps each, L=3"""
    return {
        "kitchen": [LabelMap(np.array([[1, 1], [2, 1]])), LabelMap(np.array([[1, 3], [3, 3]]))],
        "bedroom": [LabelMap(np.array([[2, 2], [2, 2]])), LabelMap(np.array([[2, 3], [2, 2]]))],
    }


@pytest.fixture
def toy_dataset(tmp_path, toy_maps):
    """toy_maps written as a dataset root"""
    root = tmp_path / "toy"
    for name, maps in toy_maps.items():
        for k, label_map in enumerate(maps):
            write_label_map(label_map, root / name / f"{k}.pgm")
    write_manifest(DatasetManifest(root=root, L=3, classes=tuple((n, len(m)) for n, m in toy_maps.items())))
    return root
