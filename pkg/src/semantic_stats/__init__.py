"""
Semantic statistics: label maps to class-level semantic representations
"""
from .label_map_reader import LabelMap, LabelMapReader, write_label_map
from .statistics import (
    ClassSemanticRepresentation,
    DatasetSemanticSummary,
    InstanceSemanticVector,
    PresenceAccumulator,
    class_representation,
    presence_vector,
    summarize_label_maps,
)
from .ingestion_pipeline import (
    DatasetManifest,
    IngestionPipeline,
    read_manifest,
    read_split,
    summarize_dataset,
    write_manifest,
)
