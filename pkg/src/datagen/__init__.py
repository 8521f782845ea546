"""
Synthetic scene datasets with known inter-class similarity
"""
from .profiles import (
    ClassProfile,
    make_confusable_profiles,
    overlap,
    overlap_matrix,
    parse_pair_specs,
)
from .sampling import SyntheticDataset, map_features, region_grid, sample_dataset, sample_label_map
from .oracles import analytic_presence, nearest_centroid_confusion, oracle_prototype
from .export import load_feature_dataset, read_feature_csv, write_dataset, write_feature_csv
