"""Scene-record file parsing, frame/telemetry alignment, and replay.

Record files are UTF-8 line-delimited JSON, one record object per line
(field-by-field schema in docs/formats.md). Parsing is lenient by
default: malformed or invariant-violating lines are skipped and reported
as diagnostics with their 1-based line numbers; strict mode raises on
the first bad line instead.
"""

from __future__ import annotations

import json
import math
import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Callable, Iterable, Sequence, TypeVar

from .model import (
    BoundingBox,
    Detection,
    Diagnostic,
    GeoFix,
    SceneRecord,
    SegClassStat,
    SegmentationSummary,
    Telemetry,
    flag_unknown_classes,
    validate_record,
)

DEFAULT_ALIGN_TOLERANCE_MS = 50.0

F = TypeVar("F")
T = TypeVar("T")


class IngestError(Exception):
    pass


class RecordParseError(IngestError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class RecordStream:
    records: list[SceneRecord]
    source: str = "<memory>"
    tolerance_ms: float = DEFAULT_ALIGN_TOLERANCE_MS
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def find(self, scenario_id: str) -> SceneRecord | None:
        for record in self.records:
            if record.scenario_id == scenario_id:
                return record
        return None


def _require(mapping: dict, key: str, kind: type):
    if key not in mapping:
        raise ValueError(f"missing field {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise ValueError(f"field {key!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _detection_from_dict(obj: dict) -> Detection:
    bbox = obj.get("bbox")
    if not (isinstance(bbox, list) and len(bbox) == 4 and all(isinstance(v, int) for v in bbox)):
        raise ValueError("bbox must be a list of four integers [x1, y1, x2, y2]")
    distance = obj.get("distance_m")
    region = obj.get("region")
    if distance is not None and not isinstance(distance, (int, float)):
        raise ValueError("distance_m must be a number or null")
    if region is not None and not isinstance(region, str):
        raise ValueError("region must be a string or null")
    return Detection(
        class_label=_require(obj, "class_label", str),
        confidence=_require(obj, "confidence", float),
        bbox=BoundingBox(*bbox),
        distance_m=float(distance) if distance is not None else None,
        region=region,
    )


def _segmentation_from_dict(obj: dict) -> SegmentationSummary:
    stats = []
    for stat in obj.get("stats", []):
        stats.append(
            SegClassStat(
                class_label=_require(stat, "class_label", str),
                left_fraction=_require(stat, "left_fraction", float),
                right_fraction=_require(stat, "right_fraction", float),
                present_left=_require(stat, "present_left", bool),
                present_right=_require(stat, "present_right", bool),
            )
        )
    return SegmentationSummary(
        road_global_fraction=_require(obj, "road_global_fraction", float), stats=tuple(stats)
    )


def record_from_dict(obj: dict) -> SceneRecord:
    if not isinstance(obj, dict):
        raise ValueError("record line must be a JSON object")
    telemetry = obj.get("telemetry")
    if telemetry is not None:
        telemetry = Telemetry(
            speed_kmh=_require(telemetry, "speed_kmh", float),
            brake_pressed=_require(telemetry, "brake_pressed", bool),
            steering_angle_deg=_require(telemetry, "steering_angle_deg", float),
        )
    geofix = _require(obj, "geofix", dict)
    address = geofix.get("address")
    if address is not None and not isinstance(address, str):
        raise ValueError("geofix.address must be a string or null")
    frame_ref = obj.get("frame_ref")
    if frame_ref is not None and not isinstance(frame_ref, str):
        raise ValueError("frame_ref must be a string or null")
    return SceneRecord(
        scenario_id=_require(obj, "scenario_id", str),
        timestamp_ms=_require(obj, "timestamp_ms", int),
        frame_width=_require(obj, "frame_width", int),
        frame_height=_require(obj, "frame_height", int),
        detections=tuple(_detection_from_dict(d) for d in _require(obj, "detections", list)),
        segmentation=_segmentation_from_dict(_require(obj, "segmentation", dict)),
        telemetry=telemetry,
        geofix=GeoFix(lat=_require(geofix, "lat", float), lon=_require(geofix, "lon", float), address=address),
        frame_ref=frame_ref,
    )


def record_to_dict(record: SceneRecord) -> dict:
    return {
        "scenario_id": record.scenario_id,
        "timestamp_ms": record.timestamp_ms,
        "frame_ref": record.frame_ref,
        "frame_width": record.frame_width,
        "frame_height": record.frame_height,
        "detections": [
            {
                "class_label": d.class_label,
                "confidence": d.confidence,
                "bbox": [d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2],
                "distance_m": d.distance_m,
                "region": d.region,
            }
            for d in record.detections
        ],
        "segmentation": {
            "road_global_fraction": float(record.segmentation.road_global_fraction),
            "stats": [
                {
                    "class_label": s.class_label,
                    "left_fraction": float(s.left_fraction),
                    "right_fraction": float(s.right_fraction),
                    "present_left": s.present_left,
                    "present_right": s.present_right,
                }
                for s in record.segmentation.stats
            ],
        },
        "telemetry": None
        if record.telemetry is None
        else {
            "speed_kmh": record.telemetry.speed_kmh,
            "brake_pressed": record.telemetry.brake_pressed,
            "steering_angle_deg": record.telemetry.steering_angle_deg,
        },
        "geofix": {
            "lat": record.geofix.lat,
            "lon": record.geofix.lon,
            "address": record.geofix.address,
        },
    }


def record_to_json_line(record: SceneRecord) -> str:
    return json.dumps(record_to_dict(record), ensure_ascii=False, separators=(", ", ": "))


def parse_scene_records(
    source: str | Path | IO[str] | Iterable[str],
    strict: bool = False,
    allow_missing_telemetry: bool = False,
) -> RecordStream:
    """Parse a line-delimited record file into a validated stream.

    Every parsed record runs through validate_record; unknown detection
    classes are flagged (kept). With ``allow_missing_telemetry`` a null
    telemetry field is tolerated (for streams awaiting a CAN log merge).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            stream = parse_scene_records(fh, strict=strict, allow_missing_telemetry=allow_missing_telemetry)
            stream.source = str(source)
            return stream

    records: list[SceneRecord] = []
    diagnostics: list[Diagnostic] = []
    last_ts: int | None = None
    for line_no, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            record = record_from_dict(json.loads(stripped))
        except (ValueError, TypeError, KeyError) as exc:
            if strict:
                raise RecordParseError(line_no, str(exc)) from exc
            diagnostics.append(Diagnostic(line_no, f"malformed record: {exc}"))
            continue
        violations = validate_record(record)
        if allow_missing_telemetry:
            violations = [v for v in violations if v != "telemetry is missing"]
        if violations:
            if strict:
                raise RecordParseError(line_no, "; ".join(violations))
            diagnostics.extend(Diagnostic(line_no, v) for v in violations)
            continue
        diagnostics.extend(Diagnostic(line_no, f) for f in flag_unknown_classes(record))
        if last_ts is not None and record.timestamp_ms < last_ts:
            diagnostics.append(
                Diagnostic(line_no, f"timestamp {record.timestamp_ms} before previous {last_ts}")
            )
        last_ts = record.timestamp_ms
        records.append(record)
    return RecordStream(records=records, diagnostics=diagnostics)


def write_records(path: str | Path, records: Iterable[SceneRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_json_line(record) + "\n")


@dataclass(frozen=True)
class AlignedPair:
    frame_ts_ms: float
    frame: object
    telemetry_ts_ms: float | None
    telemetry: object | None
    gap_ms: float | None

    @property
    def aligned(self) -> bool:
        return self.telemetry is not None


def align(
    frames: Sequence[tuple[float, F]],
    telemetry: Sequence[tuple[float, T]],
    tolerance_ms: float = DEFAULT_ALIGN_TOLERANCE_MS,
) -> list[AlignedPair]:
    """Pair each frame with its nearest telemetry sample within tolerance.

    Both inputs must be (timestamp_ms, item) lists sorted by timestamp;
    equidistant samples resolve to the earlier one. Frames with no sample
    in range come back with telemetry None (flagged unaligned).
    """
    for name, seq in (("frames", frames), ("telemetry", telemetry)):
        for a, b in zip(seq, seq[1:]):
            if b[0] < a[0]:
                raise IngestError(f"{name} timestamps are not sorted")
    pairs: list[AlignedPair] = []
    j = 0
    for ts, item in frames:
        while j + 1 < len(telemetry) and abs(telemetry[j + 1][0] - ts) < abs(telemetry[j][0] - ts):
            j += 1
        if telemetry and abs(telemetry[j][0] - ts) <= tolerance_ms:
            sample_ts, sample = telemetry[j]
            pairs.append(AlignedPair(ts, item, sample_ts, sample, abs(sample_ts - ts)))
        else:
            pairs.append(AlignedPair(ts, item, None, None, None))
    return pairs


@dataclass(frozen=True)
class ReplayEntry:
    scenario_id: str
    scheduled_offset_ms: float
    actual_offset_ms: float

    @property
    def drift_ms(self) -> float:
        return self.actual_offset_ms - self.scheduled_offset_ms


@dataclass
class ReplayReport:
    speed_factor: float
    entries: list[ReplayEntry] = field(default_factory=list)
    completed: bool = False
    error: str | None = None

    @property
    def delivered(self) -> int:
        return len(self.entries)

    @property
    def max_abs_drift_ms(self) -> float:
        return max((abs(e.drift_ms) for e in self.entries), default=0.0)


def replay(
    stream: RecordStream,
    speed_factor: float,
    sink: Callable[[SceneRecord], None],
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
) -> ReplayReport:
    """Deliver records in order, scaling inter-record gaps by 1/factor.

    ``speed_factor=math.inf`` replays as fast as possible (no sleeping).
    A sink failure aborts the run and returns the partial report.
    """
    if not stream.records:
        raise IngestError("cannot replay an empty stream")
    if math.isnan(speed_factor) or speed_factor <= 0:
        raise IngestError(f"speed_factor must be positive, got {speed_factor}")
    report = ReplayReport(speed_factor=speed_factor)
    t0_ms = stream.records[0].timestamp_ms
    start = clock()
    for record in stream.records:
        scheduled_s = 0.0 if math.isinf(speed_factor) else (record.timestamp_ms - t0_ms) / 1000.0 / speed_factor
        delay = start + scheduled_s - clock()
        if delay > 0:
            sleep(delay)
        try:
            sink(record)
        except Exception as exc:  # partial report is the contract
            report.error = f"{record.scenario_id}: {exc}"
            return report
        report.entries.append(
            ReplayEntry(record.scenario_id, scheduled_s * 1000.0, (clock() - start) * 1000.0)
        )
    report.completed = True
    return report


class TcpLineSink:
    """Replay sink emitting one JSON record per line over TCP."""

    def __init__(self, host: str, port: int, connect_timeout_s: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=connect_timeout_s)
        self._fh = self._sock.makefile("w", encoding="utf-8", newline="\n")

    def __call__(self, record: SceneRecord) -> None:
        self._fh.write(record_to_json_line(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        try:
            self._fh.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "TcpLineSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
