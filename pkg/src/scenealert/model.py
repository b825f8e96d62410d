"""Core domain types shared by every pipeline stage.

All types are immutable value objects and safe to share across threads.
Constructors deliberately do not raise on bad field values: invariants are
enforced at parse time, and ``validate_record`` reports every violation as
data so callers can choose between strict and lenient handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

REGION_LEFT = "left"
REGION_RIGHT = "right"
REGIONS = (REGION_LEFT, REGION_RIGHT)

# Detection classes the structured prompts know about. Configurable per
# pipeline; unknown labels are kept and flagged, never dropped.
DEFAULT_CLASS_SET = frozenset(
    {"person", "car", "bus", "truck", "bicycle", "traffic light", "motorcycle"}
)

# Slack for the per-record segmentation mass check on even-width frames.
SEG_MASS_EPSILON = 1e-9


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal finding tied to a source line."""

    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, origin top-left, x2/y2 exclusive."""

    x1: int
    y1: int
    x2: int
    y2: int

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def centroid_x(self) -> float:
        return (self.x1 + self.x2) / 2


@dataclass(frozen=True)
class Detection:
    """One detected object; distance/region appear after annotation."""

    class_label: str
    confidence: float
    bbox: BoundingBox
    distance_m: float | None = None
    region: str | None = None

    @property
    def annotated(self) -> bool:
        return self.distance_m is not None and self.region is not None


@dataclass(frozen=True)
class SegClassStat:
    """Per-side pixel coverage for one segmentation class.

    Fractions are plain ratios in [0, 1] (exact rationals when computed
    from a label map). Presence flags are fraction >= threshold per side.
    """

    class_label: str
    left_fraction: float
    right_fraction: float
    present_left: bool
    present_right: bool


@dataclass(frozen=True)
class SegmentationSummary:
    """Coverage summary for one frame.

    ``stats`` excludes the road class, which is reported only through
    ``road_global_fraction`` (road is a whole-frame figure everywhere it
    is consumed downstream).
    """

    road_global_fraction: float
    stats: tuple[SegClassStat, ...] = ()

    def stat_for(self, class_label: str) -> SegClassStat | None:
        wanted = class_label.lower()
        for stat in self.stats:
            if stat.class_label.lower() == wanted:
                return stat
        return None


@dataclass(frozen=True)
class Telemetry:
    speed_kmh: float
    brake_pressed: bool
    steering_angle_deg: float


@dataclass(frozen=True)
class GeoFix:
    lat: float
    lon: float
    address: str | None = None


@dataclass(frozen=True)
class SceneRecord:
    """One synchronized frame snapshot with all its modalities.

    ``telemetry`` may be None on freshly parsed records that reference an
    external CAN log; it must be filled before prompt rendering.
    """

    scenario_id: str
    timestamp_ms: int
    frame_width: int
    frame_height: int
    detections: tuple[Detection, ...]
    segmentation: SegmentationSummary
    telemetry: Telemetry | None
    geofix: GeoFix
    frame_ref: str | None = None


@dataclass(frozen=True)
class Alert:
    """A back end's response to one prompt, with measured latency."""

    backend_id: str
    text: str
    risk_flag: bool
    latency_ms: float


@dataclass(frozen=True)
class HumanAnnotation:
    scenario_id: str
    risk: bool
    critical_entities: tuple[str, ...]
    summary: str = ""


def _validate_detection(i: int, det: Detection, width: int, height: int) -> list[str]:
    out = []
    where = f"detections[{i}]"
    if not (0.0 <= det.confidence <= 1.0):
        out.append(f"{where}: confidence out of range ({det.confidence})")
    b = det.bbox
    if b.x2 <= b.x1 or b.y2 <= b.y1:
        out.append(f"{where}: degenerate bbox ({b.x1},{b.y1},{b.x2},{b.y2})")
    if min(b.x1, b.y1, b.x2, b.y2) < 0:
        out.append(f"{where}: bbox has negative coordinates")
    if b.x2 > width or b.y2 > height:
        out.append(f"{where}: bbox exceeds frame bounds")
    if det.distance_m is not None and not det.distance_m > 0:
        out.append(f"{where}: distance_m must be positive ({det.distance_m})")
    if (det.distance_m is None) != (det.region is None):
        out.append(f"{where}: distance and region must be annotated together")
    if det.region is not None and det.region not in REGIONS:
        out.append(f"{where}: unknown region {det.region!r}")
    return out


def _validate_segmentation(seg: SegmentationSummary, width: int) -> list[str]:
    out = []
    if not (0.0 <= seg.road_global_fraction <= 1.0):
        out.append(f"segmentation: road_global_fraction out of range ({seg.road_global_fraction})")
    mass = float(seg.road_global_fraction)
    for stat in seg.stats:
        for side, frac in (("left", stat.left_fraction), ("right", stat.right_fraction)):
            if not (0.0 <= frac <= 1.0):
                out.append(f"segmentation[{stat.class_label}]: {side}_fraction out of range ({frac})")
        mass += (float(stat.left_fraction) + float(stat.right_fraction)) / 2
    # The mass check is exact only when both halves have equal pixel area.
    if width % 2 == 0 and mass > 1.0 + SEG_MASS_EPSILON:
        out.append(f"segmentation: class fractions sum to {mass:.6f} > 1")
    return out


def validate_record(record: SceneRecord) -> list[str]:
    """Return every invariant violation in ``record`` (empty list = valid).

    Pure and idempotent; violations are data, not failures.
    """
    out: list[str] = []
    if not record.scenario_id:
        out.append("scenario_id is empty")
    if record.timestamp_ms < 0:
        out.append(f"timestamp_ms is negative ({record.timestamp_ms})")
    if record.frame_width <= 0 or record.frame_height <= 0:
        out.append(f"frame dimensions must be positive ({record.frame_width}x{record.frame_height})")
    for i, det in enumerate(record.detections):
        out.extend(_validate_detection(i, det, record.frame_width, record.frame_height))
    out.extend(_validate_segmentation(record.segmentation, record.frame_width))
    if record.telemetry is None:
        out.append("telemetry is missing")
    else:
        if record.telemetry.speed_kmh < 0:
            out.append(f"telemetry: speed_kmh is negative ({record.telemetry.speed_kmh})")
        if not math.isfinite(record.telemetry.steering_angle_deg):
            out.append("telemetry: steering_angle_deg is not finite")
    if not (-90.0 <= record.geofix.lat <= 90.0):
        out.append(f"geofix: lat out of range ({record.geofix.lat})")
    if not (-180.0 <= record.geofix.lon <= 180.0):
        out.append(f"geofix: lon out of range ({record.geofix.lon})")
    return out


def flag_unknown_classes(
    record: SceneRecord, class_set: frozenset[str] | set[str] = DEFAULT_CLASS_SET
) -> list[str]:
    """Flag detection labels outside the configured class set.

    Unknown classes are reported, never removed: the evaluation harness
    must see everything the detector saw.
    """
    flags = []
    for i, det in enumerate(record.detections):
        if det.class_label not in class_set:
            flags.append(f"detections[{i}]: unknown class label {det.class_label!r}")
    return flags
