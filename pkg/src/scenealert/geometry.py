"""Pinhole distance estimation and left/right region assignment.

Distance follows the pinhole projection relation: an object of known
real-world height H metres whose bounding box spans h pixels lies at
approximately ``focal_px * H / h`` metres. Region assignment splits the
frame into two equal halves along the vertical axis; a centroid exactly
on the midline counts as right (half-open [0, W/2) is left).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Iterable, Mapping

from .model import REGION_LEFT, REGION_RIGHT, BoundingBox, Detection

DEFAULT_FOCAL_PX = 800.0

# Assumed real-world average heights in metres. person and car reproduce
# the reference detector output at the default focal length; the rest are
# typical physical sizes, overridable in the pipeline config.
DEFAULT_CLASS_HEIGHTS_M: Mapping[str, float] = MappingProxyType(
    {
        "person": 1.7,
        "car": 1.5,
        "bus": 3.2,
        "truck": 3.0,
        "bicycle": 1.1,
        "traffic light": 0.9,
        "motorcycle": 1.3,
    }
)


class GeometryError(ValueError):
    """Degenerate geometry or missing calibration data."""


@dataclass(frozen=True)
class CameraCalibration:
    """Focal length in pixels plus the frame it applies to."""

    focal_px: float = DEFAULT_FOCAL_PX
    frame_width: int = 1920
    frame_height: int = 1080

    def __post_init__(self) -> None:
        if self.focal_px <= 0:
            raise GeometryError(f"focal_px must be positive, got {self.focal_px}")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise GeometryError("frame dimensions must be positive")


@dataclass(frozen=True)
class ClassHeightTable:
    """Map from detection class label to assumed real-world height."""

    heights_m: Mapping[str, float] = DEFAULT_CLASS_HEIGHTS_M

    def __post_init__(self) -> None:
        for label, h in self.heights_m.items():
            if h <= 0:
                raise GeometryError(f"height for {label!r} must be positive, got {h}")

    def height_for(self, class_label: str) -> float:
        try:
            return self.heights_m[class_label]
        except KeyError:
            raise GeometryError(f"no height entry for class {class_label!r}") from None


def estimate_distance(focal_px: float, class_height_m: float, bbox_height_px: float) -> float:
    """Distance in metres from apparent bbox height via pinhole projection."""
    if bbox_height_px <= 0:
        raise GeometryError(f"bbox height must be positive, got {bbox_height_px}")
    if focal_px <= 0 or class_height_m <= 0:
        raise GeometryError("focal length and class height must be positive")
    return focal_px * class_height_m / bbox_height_px


def assign_region(bbox: BoundingBox, frame_width: int) -> str:
    """Assign "left" or "right" by bbox centroid; midline ties go right."""
    if frame_width <= 0:
        raise GeometryError(f"frame_width must be positive, got {frame_width}")
    return REGION_LEFT if bbox.centroid_x < frame_width / 2 else REGION_RIGHT


def annotate_detections(
    detections: Iterable[Detection],
    calib: CameraCalibration,
    heights: ClassHeightTable | None = None,
) -> list[Detection]:
    """Fill distance and region on every detection, nearest first.

    Output is a permutation of the input, sorted ascending by distance
    with ties broken by confidence (descending) then input order.
    Raises GeometryError naming the class when a height entry is missing.
    """
    heights = heights or ClassHeightTable()
    annotated = []
    for order, det in enumerate(detections):
        dist = estimate_distance(
            calib.focal_px, heights.height_for(det.class_label), det.bbox.height
        )
        region = assign_region(det.bbox, calib.frame_width)
        annotated.append((dist, -det.confidence, order, replace(det, distance_m=dist, region=region)))
    annotated.sort(key=lambda item: item[:3])
    return [det for *_key, det in annotated]
