"""
Ingestion pipeline that turns a dataset layout on disk into class-level semantic representations
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import pandas as pd
from tqdm import tqdm

from ..errors import EmptyClassError, IngestionError
from .label_map_reader import LabelMapReader
from .statistics import (
    DatasetSemanticSummary,
    InstanceSemanticVector,
    PresenceAccumulator,
    presence_vector,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest"
SPLIT_NAME = "split.csv"


@dataclass(frozen=True)
class DatasetManifest:
    """Declared label count and (class name, map count) list of a dataset root"""

    root: Path
    L: int
    classes: Tuple[Tuple[str, int], ...]

    @property
    def class_names(self) -> List[str]:
        return [name for name, _ in self.classes]

    def map_path(self, class_name: str, index: int) -> Path:
        return self.root / class_name / f"{index}.pgm"

    def map_paths(self, class_name: str, indices: Optional[Sequence[int]] = None) -> List[Path]:
        counts = dict(self.classes)
        if indices is None:
            indices = range(counts[class_name])
        return [self.map_path(class_name, k) for k in indices]


def read_manifest(root) -> DatasetManifest:
    """Parse ``<root>/manifest``: a ``labels <L>`` line then ``class <name> <count>`` lines"""
    root = Path(root)
    path = root / MANIFEST_NAME
    if not path.exists():
        raise IngestionError(f"Manifest not found: {path}")

    L = None
    classes = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "labels" and len(parts) == 2:
                L = int(parts[1])
            elif parts[0] == "class" and len(parts) == 3:
                classes.append((parts[1], int(parts[2])))
            else:
                raise ValueError(line)
        except ValueError as e:
            raise IngestionError(f"Malformed manifest line {line_no} in {path}: {raw!r}") from e

    if L is None or L < 1:
        raise IngestionError(f"Manifest {path} must declare 'labels <L>' with L >= 1")
    if not classes:
        raise IngestionError(f"Manifest {path} lists no classes")
    names = [name for name, _ in classes]
    if len(set(names)) != len(names):
        raise IngestionError(f"Manifest {path} lists a class twice")
    return DatasetManifest(root=root, L=L, classes=tuple(classes))


def write_manifest(manifest: DatasetManifest) -> Path:
    path = Path(manifest.root) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# semantic label map dataset", f"labels {manifest.L}"]
    lines += [f"class {name} {count}" for name, count in manifest.classes]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_split(root) -> pd.DataFrame:
    """Train/test assignment of every map: columns class, index, split"""
    path = Path(root) / SPLIT_NAME
    if not path.exists():
        raise IngestionError(f"Split file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestionError(f"Malformed split file {path}: {e}") from e
    if list(frame.columns) != ["class", "index", "split"]:
        raise IngestionError(f"Split file {path} must have columns class,index,split")
    return frame


class IngestionPipeline:
    """Streams label maps class by class into presence counts"""

    def __init__(self, workers: int = 1, show_progress: bool = False):
        self.reader = LabelMapReader()
        self.workers = max(1, int(workers))
        self.show_progress = show_progress
        logger.info(f"Ingestion pipeline initialized (workers={self.workers})")

    def ingest_file(self, file_path, L: int) -> InstanceSemanticVector:
        """Read one label map and return its presence vector"""
        label_map = self.reader.process_file(file_path)
        if label_map.maxval is not None and label_map.maxval < L:
            raise IngestionError(f"PGM maxval {label_map.maxval} is below L={L}: {file_path}")
        return presence_vector(label_map, L)

    def ingest_class(self, class_name: str, paths: Sequence[Path], L: int) -> PresenceAccumulator:
        """
        Accumulate presence counts for every map of one class

        Args:
            class_name: Name used in error messages
            paths: Label map files of the class
            L: Declared number of semantic labels

        Returns:
            Integer accumulator; identical for sequential and threaded runs
        """
        if not paths:
            raise EmptyClassError(f"Class {class_name} has no label maps")

        accumulator = PresenceAccumulator(L)
        progress = tqdm(total=len(paths), desc=class_name, disable=not self.show_progress)
        if self.workers == 1:
            for path in paths:
                accumulator.add(self.ingest_file(path, L))
                progress.update()
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                for vector in pool.map(lambda p: self.ingest_file(p, L), paths):
                    accumulator.add(vector)
                    progress.update()
        progress.close()
        logger.info(f"Ingested {len(paths)} label maps for class {class_name}")
        return accumulator

    def summarize_dataset(
        self,
        manifest: DatasetManifest,
        split: Optional[str] = None,
    ) -> DatasetSemanticSummary:
        """
        Build one class representation per manifest class, in manifest order

        Args:
            manifest: Parsed dataset manifest
            split: Restrict to 'train' or 'test' maps listed in split.csv (all maps if None)
        """
        start_time = datetime.now()
        selected: Dict[str, List[int]] = {}
        if split is not None:
            frame = read_split(manifest.root)
            frame = frame[frame["split"] == split]
            for name in manifest.class_names:
                selected[name] = sorted(frame.loc[frame["class"] == name, "index"].astype(int))

        representations = []
        for class_id, (class_name, _) in enumerate(manifest.classes, start=1):
            paths = manifest.map_paths(class_name, selected.get(class_name))
            accumulator = self.ingest_class(class_name, paths, manifest.L)
            representations.append(accumulator.to_representation(class_id, class_name))

        duration = (datetime.now() - start_time).total_seconds()
        logger.info(
            f"Summarized {len(representations)} classes from {manifest.root} in {duration:.2f}s"
        )
        return DatasetSemanticSummary(L=manifest.L, representations=tuple(representations))


def summarize_dataset(root_or_manifest, split: Optional[str] = None, workers: int = 1,
                      show_progress: bool = False) -> DatasetSemanticSummary:
    """Convenience wrapper: manifest path or object in, dataset summary out"""
    manifest = root_or_manifest
    if not isinstance(manifest, DatasetManifest):
        manifest = read_manifest(root_or_manifest)
    pipeline = IngestionPipeline(workers=workers, show_progress=show_progress)
    return pipeline.summarize_dataset(manifest, split=split)
