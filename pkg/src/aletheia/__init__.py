"""Training-free multimodal claim verification with ranked open-web evidence."""

from .core import (
    BinaryLabel,
    Claim,
    CostLedger,
    LabelMap,
    StageTimings,
    map_verdict_label,
    normalize_claim,
)
from .pipeline import Pipeline
from .verify import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "BinaryLabel",
    "Claim",
    "CostLedger",
    "LabelMap",
    "Pipeline",
    "StageTimings",
    "VerificationReport",
    "map_verdict_label",
    "normalize_claim",
]
