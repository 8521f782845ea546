"""
Configuration management for the similarity prototype toolkit
"""
import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    """Application configuration"""

    # Application
    OUTPUT_ROOT = os.getenv("SIMPROTO_OUTPUT_ROOT", "runs")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    WORKERS = int(os.getenv("SIMPROTO_WORKERS", "1"))
    VERSION = "0.3.0"

    # Label softening
    DEFAULT_STEP = 20  # epochs using soft labels
    CONFIDENCE_CAP = 0.99
    LSR_EPSILON = 0.1

    # Trainer (desk-scale protocol)
    HIDDEN_WIDTH = 64
    BATCH_SIZE = 32
    LEARNING_RATE = 1e-3
    WEIGHT_DECAY = 1e-5
    EPOCHS = 30
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8
    GRADCHECK_STEP = 1e-5

    # Synthetic benchmark generator
    GEN_CLASSES = 7
    GEN_LABELS = 30
    GEN_REGIONS = 12
    GEN_WIDTH = 24
    GEN_HEIGHT = 24
    GEN_PAIRS = ["1-2:0.8", "3-4:0.8"]
    GEN_PER_CLASS = 300
    GEN_FEATURE_NOISE = 0.05
    GEN_BACKGROUND = 0.05  # occurrence mass every class shares
    GEN_DISTRACTORS = 16
    GEN_DISTRACTOR_SCALE = 0.1
    GEN_TRAIN_FRACTION = 0.5

    # Label map files
    SUPPORTED_FORMATS = [".pgm"]
    MAX_PGM_VALUE = 65535
    CSV_FLOAT_FORMAT = "%.17g"  # round-trip precision for every numeric CSV

    @classmethod
    def validate(cls):
        """Validate that the configuration is usable"""
        problems = []
        if not cls.OUTPUT_ROOT:
            problems.append("SIMPROTO_OUTPUT_ROOT")
        if cls.WORKERS < 1:
            problems.append("SIMPROTO_WORKERS")
        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append("LOG_LEVEL")
        if not 0.0 < cls.CONFIDENCE_CAP < 1.0:
            problems.append("CONFIDENCE_CAP")
        if problems:
            raise ValueError(f"Invalid configuration: {', '.join(problems)}")
        return True
