"""
Exception hierarchy shared by every subpackage.

All errors derive from ValueError so callers that only know the
inherited ``except ValueError`` convention still catch them.
"""


class SimProtoError(ValueError):
    """Base class for all toolkit errors"""


class LabelOutOfRangeError(SimProtoError):
    """A label map pixel lies outside [1, L]"""


class EmptyClassError(SimProtoError):
    """A class has no instances"""


class DimensionMismatchError(SimProtoError):
    """Vectors or matrices with incompatible shapes"""


class IngestionError(SimProtoError):
    """A dataset file is missing, unreadable or malformed"""


class DegenerateRepresentationError(SimProtoError):
    """A class representation has zero norm"""


class DegenerateRowError(SimProtoError):
    """A matrix row (or logit row) cannot be normalized"""


class InvalidConfidenceError(SimProtoError):
    """A confidence or smoothing weight outside (0, 1)"""


class InvalidEpochError(SimProtoError):
    """Epoch index below 1"""


class NumericError(SimProtoError):
    """Non-finite values reached a loss or gradient"""


class ProfileSpecError(SimProtoError):
    """Infeasible synthetic class profile specification"""


class GeometryError(SimProtoError):
    """Label map geometry cannot be tiled into the requested regions"""


class UnsupportedModelError(SimProtoError):
    """Operation needs a model shape this network does not have"""


class EmptyDatasetError(SimProtoError):
    """A dataset or split holds no samples"""


class ConfigError(SimProtoError):
    """Invalid run configuration"""
