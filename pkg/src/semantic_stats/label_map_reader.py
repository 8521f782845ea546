"""
Label map file processing (PGM, plain P2 and binary P5)
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
import logging

import numpy as np
from PIL import Image

from config import Config
from ..errors import IngestionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel semantic labels of one image, 1-based, shape (H, W)"""

    labels: np.ndarray
    source: Optional[str] = None
    maxval: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.shape[0] < 1 or labels.shape[1] < 1:
            raise IngestionError(f"Label map must be a non-empty 2-D grid, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            raise IngestionError(f"Label map must hold integers, got {labels.dtype}")
        labels = labels.astype(np.int64, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    __hash__ = None


class LabelMapReader:
    """Reads label map files and extracts their label grids"""

    def __init__(self):
        self.supported_formats = Config.SUPPORTED_FORMATS

    def process_file(self, file_path) -> LabelMap:
        """
        Read a label map file

        Args:
            file_path: Path to the label map

        Returns:
            LabelMap with the decoded labels and the file's maxval
        """
        file_path = Path(file_path)

        if not file_path.exists():
            raise IngestionError(f"Label map not found: {file_path}")

        file_ext = file_path.suffix.lower()
        if file_ext not in self.supported_formats:
            raise IngestionError(f"Unsupported label map format: {file_path}")

        try:
            data = file_path.read_bytes()
        except OSError as e:
            logger.error(f"Error reading label map {file_path}: {str(e)}")
            raise IngestionError(f"Cannot read label map {file_path}: {e}") from e

        labels, maxval = self._extract_pgm(data, file_path)
        return LabelMap(labels=labels, source=str(file_path), maxval=maxval)

    def _extract_pgm(self, data: bytes, file_path: Path):
        """Decode a P2/P5 raster without rescaling to the maxval"""
        magic, width, height, maxval, offset = _read_pgm_header(data, file_path)
        count = width * height

        if magic == b"P5":
            dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
            if len(data) - offset < count * dtype.itemsize:
                raise IngestionError(f"Truncated PGM raster in {file_path}")
            raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        else:
            try:
                raster = np.array(data[offset:].split(), dtype=np.int64)
            except ValueError as e:
                raise IngestionError(f"Non-numeric pixel in {file_path}") from e
            if raster.size != count:
                raise IngestionError(
                    f"Expected {count} pixels in {file_path}, found {raster.size}"
                )

        raster = raster.astype(np.int64).reshape(height, width)
        if raster.max() > maxval:
            raise IngestionError(f"Pixel value above maxval {maxval} in {file_path}")
        return raster, maxval


def _read_pgm_header(data: bytes, file_path: Path):
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise IngestionError(f"Truncated PGM header in {file_path}")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])

    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise IngestionError(f"Not a PGM label map (magic {magic!r}): {file_path}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise IngestionError(f"Malformed PGM header in {file_path}") from e
    if width < 1 or height < 1:
        raise IngestionError(f"Empty PGM geometry {width}x{height} in {file_path}")
    if not 1 <= maxval <= Config.MAX_PGM_VALUE:
        raise IngestionError(f"PGM maxval {maxval} outside [1, 65535] in {file_path}")
    # exactly one whitespace byte separates the header from a binary raster
    return magic, width, height, maxval, pos + 1


def write_label_map(label_map: LabelMap, file_path) -> Path:
    """Write a label map as binary PGM (8-bit when every label fits, else 16-bit)"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    labels = label_map.labels
    if labels.min() < 0 or labels.max() > Config.MAX_PGM_VALUE:
        raise IngestionError(f"Labels do not fit a PGM raster: {file_path}")
    if labels.max() <= 255:
        image = Image.fromarray(labels.astype(np.uint8))
    else:
        image = Image.fromarray(labels.astype(np.int32))
    image.save(file_path, format="PPM")
    return file_path
