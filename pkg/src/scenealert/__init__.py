"""scenealert: fuse driving-scene perception, telemetry and location into
structured LLM prompts, dispatch them, and evaluate the resulting alerts."""

from .model import (
    Alert,
    BoundingBox,
    Detection,
    GeoFix,
    HumanAnnotation,
    SceneRecord,
    SegClassStat,
    SegmentationSummary,
    Telemetry,
    validate_record,
)
from .geometry import (
    CameraCalibration,
    ClassHeightTable,
    annotate_detections,
    assign_region,
    estimate_distance,
)
from .promptgen import DEFAULT_INSTRUCTION, PromptText, prompt_digest, render_prompt

__version__ = "0.1.0"

__all__ = [
    "Alert",
    "BoundingBox",
    "CameraCalibration",
    "ClassHeightTable",
    "DEFAULT_INSTRUCTION",
    "Detection",
    "GeoFix",
    "HumanAnnotation",
    "PromptText",
    "SceneRecord",
    "SegClassStat",
    "SegmentationSummary",
    "Telemetry",
    "annotate_detections",
    "assign_region",
    "estimate_distance",
    "prompt_digest",
    "render_prompt",
    "validate_record",
    "__version__",
]
