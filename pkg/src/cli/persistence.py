"""
Artifact files: representation tables, prototype archives, checkpoints and run reports.

Every float is written with 17 significant digits and read back with pandas'
round-trip parser, so saved matrices reload bit for bit.
"""
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple
import hashlib
import json
import logging

import numpy as np
import pandas as pd

from config import Config
from ..errors import IngestionError
from ..model import MlpClassifier
from ..prototype import CorrelationMetric, SimilarityPrototype
from ..semantic_stats import ClassSemanticRepresentation, DatasetSemanticSummary

logger = logging.getLogger(__name__)

PROTO_MATRIX = "proto.csv"
PROTO_METADATA = "proto.json"
CHECKPOINT_MAGIC = "simproto-checkpoint"
CHECKPOINT_VERSION = 1


def _to_csv(frame: pd.DataFrame, path: Path, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=Config.CSV_FLOAT_FORMAT, lineterminator="\n", **kwargs)
    return path


def _read_csv(path: Path, what: str, **kwargs) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"{what} not found: {path}")
    try:
        return pd.read_csv(path, float_precision="round_trip", **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestionError(f"Malformed {what.lower()} {path}: {e}") from e


def write_json(payload: Dict[str, Any], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"JSON file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestionError(f"Malformed JSON in {path}: {e}") from e


# Representation tables

def representation_csv_text(summary: DatasetSemanticSummary) -> str:
    return summary.to_frame().to_csv(index=False, float_format=Config.CSV_FLOAT_FORMAT, lineterminator="\n")


def summary_digest(summary: DatasetSemanticSummary) -> str:
    """SHA-256 of the representation table a prototype was built from"""
    return hashlib.sha256(representation_csv_text(summary).encode("utf-8")).hexdigest()


def write_representations(summary: DatasetSemanticSummary, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(representation_csv_text(summary), encoding="utf-8")
    logger.info(f"Wrote {summary.C} class representations to {path}")
    return path


def read_representations(path) -> DatasetSemanticSummary:
    """Inverse of write_representations; counts are recovered as round(value * N)"""
    frame = _read_csv(path, "Representation table")
    label_columns = [c for c in frame.columns if c.startswith("l")]
    if list(frame.columns[:3]) != ["class_id", "class_name", "N"] or not label_columns:
        raise IngestionError(f"Representation table {path} must have header class_id,class_name,N,l1..lL")
    values = frame[label_columns].to_numpy(dtype=np.float64)
    representations = []
    for row, (_, record) in enumerate(frame.iterrows()):
        N = int(record["N"])
        counts = np.rint(values[row] * N).astype(np.int64)
        representations.append(ClassSemanticRepresentation(
            class_id=int(record["class_id"]),
            class_name=str(record["class_name"]),
            instance_count=N,
            values=values[row].copy(),
            counts=counts,
        ))
    return DatasetSemanticSummary(L=len(label_columns), representations=tuple(representations))


# Prototype archives

def save_prototype(prototype: SimilarityPrototype, directory, L: int, digest: str) -> Path:
    """Write proto.csv (class-name header, C rows) and the proto.json sidecar"""
    directory = Path(directory)
    frame = pd.DataFrame(prototype.matrix, columns=list(prototype.class_names))
    _to_csv(frame, directory / PROTO_MATRIX)
    write_json({
        "metric": prototype.metric.value,
        "C": prototype.C,
        "L": int(L),
        "class_names": list(prototype.class_names),
        "digest": digest,
        "version": Config.VERSION,
    }, directory / PROTO_METADATA)
    logger.info(f"Saved {prototype.metric.value} prototype ({prototype.C} classes) to {directory}")
    return directory


def load_prototype(directory) -> Tuple[SimilarityPrototype, Dict[str, Any]]:
    """Prototype and its metadata from an archive directory"""
    directory = Path(directory)
    metadata = read_json(directory / PROTO_METADATA)
    frame = _read_csv(directory / PROTO_MATRIX, "Prototype matrix")
    names = [str(c) for c in frame.columns]
    if names != list(metadata.get("class_names", [])):
        raise IngestionError(f"Prototype archive {directory}: matrix header and metadata class names differ")
    if metadata.get("C") != len(names):
        raise IngestionError(f"Prototype archive {directory}: metadata C does not match the matrix")
    prototype = SimilarityPrototype(
        class_names=tuple(names),
        metric=CorrelationMetric(metadata["metric"]),
        matrix=frame.to_numpy(dtype=np.float64),
    )
    return prototype, metadata


# Checkpoints

def _format_row(values) -> str:
    return " ".join(Config.CSV_FLOAT_FORMAT % v for v in np.ravel(values))


def save_checkpoint(model: MlpClassifier, path) -> Path:
    """Versioned text checkpoint: dims, then per layer the weight rows and the bias row"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}", "dims " + " ".join(str(d) for d in model.layer_dims)]
    for weight, bias in zip(model.weights, model.biases):
        lines.append(f"weight {weight.shape[0]} {weight.shape[1]}")
        lines.extend(_format_row(row) for row in weight)
        lines.append(f"bias {bias.shape[0]}")
        lines.append(_format_row(bias))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path) -> MlpClassifier:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"Checkpoint not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        magic, version = lines[0].split()
        if magic != CHECKPOINT_MAGIC or int(version) != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported header {lines[0]!r}")
        head, *dims = lines[1].split()
        if head != "dims" or len(dims) < 2:
            raise ValueError("missing dims line")
        dims = [int(d) for d in dims]

        weights: List[np.ndarray] = []
        biases: List[np.ndarray] = []
        cursor = 2
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            tag, rows, cols = lines[cursor].split()
            if tag != "weight" or (int(rows), int(cols)) != (fan_in, fan_out):
                raise ValueError(f"line {cursor + 1}: expected 'weight {fan_in} {fan_out}'")
            block = lines[cursor + 1:cursor + 1 + fan_in]
            weights.append(np.array([[float(v) for v in row.split()] for row in block], dtype=np.float64)
                           .reshape(fan_in, fan_out))
            cursor += 1 + fan_in
            tag, size = lines[cursor].split()
            if tag != "bias" or int(size) != fan_out:
                raise ValueError(f"line {cursor + 1}: expected 'bias {fan_out}'")
            biases.append(np.array([float(v) for v in lines[cursor + 1].split()], dtype=np.float64)
                          .reshape(fan_out))
            cursor += 2
    except (ValueError, IndexError) as e:
        raise IngestionError(f"Malformed checkpoint {path}: {e}") from e
    return MlpClassifier(weights, biases)


# Reports

def write_matrix_csv(matrix: np.ndarray, class_names: Sequence[str], path) -> Path:
    """Square matrix with a class-name header row"""
    return _to_csv(pd.DataFrame(np.asarray(matrix), columns=list(class_names)), path)


def write_frame(frame: pd.DataFrame, path) -> Path:
    return _to_csv(frame, path)


def read_frame(path, what: str = "Table") -> pd.DataFrame:
    return _read_csv(path, what)
