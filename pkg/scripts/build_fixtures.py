#!/usr/bin/env python3
"""Regenerate the committed fixtures under fixtures/.

Scenario 1 carries raw detector boxes (distance/region computed by the
pipeline); scenarios 2 and 3 carry pre-annotated distances and regions
with plausible synthetic boxes, since only distances are known for them.
Run from the repo root: python scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scenealert.canbus import SignalSpec, encode_signal
from scenealert.geometry import CameraCalibration, ClassHeightTable, annotate_detections
from scenealert.ingest import record_from_dict, record_to_json_line, write_records
from scenealert.model import SceneRecord, validate_record
from scenealert.promptgen import prompt_digest, render_prompt

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

FRAME_W, FRAME_H = 1920, 1080


def det(label, conf, bbox, dist=None, region=None):
    return {
        "class_label": label,
        "confidence": conf,
        "bbox": list(bbox),
        "distance_m": dist,
        "region": region,
    }


def seg(label, left, right, threshold=0.001):
    return {
        "class_label": label,
        "left_fraction": left,
        "right_fraction": right,
        "present_left": left >= threshold,
        "present_right": right >= threshold,
    }


SCENARIOS = [
    {
        "scenario_id": "scenario1",
        "timestamp_ms": 1_700_000_000_000,
        "frame_ref": None,
        "frame_width": FRAME_W,
        "frame_height": FRAME_H,
        # Raw detector output; the pipeline fills distance and region.
        "detections": [
            det("person", 0.89, (1400, 725, 1504, 952)),
            det("person", 0.86, (1568, 726, 1635, 933)),
            det("car", 0.80, (803, 589, 866, 641)),
            det("car", 0.55, (750, 551, 818, 597)),
        ],
        "segmentation": {
            "road_global_fraction": 0.3507,
            "stats": [
                seg("sidewalk", 0.0, 0.0),
                seg("vegetation", 0.0664, 0.0635),
                seg("terrain", 0.0252, 0.0569),
            ],
        },
        "telemetry": {"speed_kmh": 40.0, "brake_pressed": False, "steering_angle_deg": -0.00065},
        "geofix": {
            "lat": -25.0945,
            "lon": -50.1633,
            "address": "Av. Monteiro Lobato, Ponta Grossa, Brazil.",
        },
    },
    {
        "scenario_id": "scenario2",
        "timestamp_ms": 1_700_000_060_000,
        "frame_ref": None,
        "frame_width": FRAME_W,
        "frame_height": FRAME_H,
        "detections": [
            det("bus", 0.96, (0, 60, 640, 1060), 2.26, "left"),
            det("car", 0.93, (1150, 520, 1560, 800), 4.29, "right"),
            det("truck", 0.90, (1480, 400, 1900, 764), 6.59, "right"),
            det("car", 0.90, (1190, 560, 1370, 675), 10.43, "right"),
            det("car", 0.82, (1020, 572, 1150, 656), 14.29, "right"),
            det("car", 0.70, (880, 580, 932, 613), 36.36, "left"),
        ],
        "segmentation": {
            "road_global_fraction": 0.2667,
            "stats": [
                seg("sidewalk", 0.0021, 0.0047),
                seg("vegetation", 0.0837, 0.1293),
            ],
        },
        "telemetry": {"speed_kmh": 18.0, "brake_pressed": True, "steering_angle_deg": -1.0151},
        "geofix": {
            "lat": -23.5954,
            "lon": -46.6853,
            "address": "Rua Professor Geraldo Ataliba, Vila Olímpia, Itaim Bibi, São Paulo, Brazil.",
        },
    },
    {
        "scenario_id": "scenario3",
        "timestamp_ms": 1_700_000_120_000,
        "frame_ref": None,
        "frame_width": FRAME_W,
        "frame_height": FRAME_H,
        "detections": [
            det("car", 0.88, (300, 500, 780, 804), 3.95, "left"),
            det("car", 0.89, (1250, 556, 1445, 681), 9.60, "right"),
            det("car", 0.90, (700, 562, 868, 670), 11.11, "left"),
            det("bicycle", 0.87, (1480, 590, 1520, 668), 11.29, "right"),
            det("car", 0.73, (1100, 576, 1220, 653), 15.58, "right"),
            det("car", 0.86, (820, 580, 926, 648), 17.65, "left"),
            det("car", 0.80, (610, 584, 697, 640), 21.43, "left"),
            det("car", 0.75, (1390, 585, 1476, 640), 21.82, "right"),
            det("traffic light", 0.79, (1620, 300, 1634, 331), 23.53, "right"),
            det("traffic light", 0.82, (420, 290, 434, 320), 24.39, "left"),
            det("traffic light", 0.73, (150, 295, 163, 324), 25.00, "left"),
            det("car", 0.78, (880, 588, 947, 631), 27.91, "left"),
            det("bus", 0.74, (1700, 530, 1870, 620), 28.57, "right"),
        ],
        "segmentation": {
            "road_global_fraction": 0.3992,
            "stats": [
                seg("sidewalk", 0.0030, 0.0049),
                seg("person", 0.0012, 0.0034),
                seg("building", 0.1763, 0.1558),
                seg("vegetation", 0.0387, 0.0509),
            ],
        },
        "telemetry": {"speed_kmh": 32.0, "brake_pressed": False, "steering_angle_deg": -1.0151},
        "geofix": {
            "lat": -23.5934,
            "lon": -46.6842,
            "address": "Av. Presidente Juscelino Kubitschek, Vila Olímpia, São Paulo, Brazil.",
        },
    },
]

ANNOTATIONS = [
    {
        "scenario_id": "scenario1",
        "risk": True,
        "critical_entities": ["person", "car"],
        "summary": "Two pedestrians ahead-right around 6-7 m with no sidewalk; cars on the left at 23-26 m.",
    },
    {
        "scenario_id": "scenario2",
        "risk": True,
        "critical_entities": ["bus", "car", "truck"],
        "summary": "Bus very close on the left at 2.3 m, car right at 4.3 m, truck ahead-right at 6.6 m.",
    },
    {
        "scenario_id": "scenario3",
        "risk": True,
        "critical_entities": ["bicycle", "car", "traffic light"],
        "summary": "Bicycle ahead-right at 11 m, car close on the left at 4 m, traffic lights ahead at 24-25 m.",
    },
]

GEOCODE_TABLE = [
    ("-25.09450,-50.16330", "Avenida Monteiro Lobato, Jardim Carvalho, Ponta Grossa, Brazil"),
    ("-23.59540,-46.68530", "Rua Professor Geraldo Ataliba, Vila Olímpia, Itaim Bibi, São Paulo, Brazil"),
    ("-23.59340,-46.68420", "Av. Presidente Juscelino Kubitschek, Vila Olímpia, São Paulo, Brazil"),
]

CAN_SIGNALS = {
    "speed": SignalSpec("speed", 0x244, 0, 16, "little_endian", False, 0.01, 0.0, "km/h"),
    "brake": SignalSpec("brake", 0x1F0, 0, 1, "little_endian", False, 1.0, 0.0, ""),
    "steering": SignalSpec("steering", 0x025, 0, 16, "little_endian", True, 0.1, 0.0, "deg"),
}

# (offset_ms, signal, value) — speed/brake/steering settle on the
# reference telemetry (40 km/h, pressed, -0.5 deg) by the last line.
CAN_TIMELINE = [
    (0, "speed", 37.92),
    (10, "brake", 0.0),
    (20, "steering", 0.0),
    (50, "speed", 40.0),
    (60, "brake", 1.0),
    (70, "steering", -0.5),
]

PIPELINE_YAML = """\
# scenealert pipeline configuration (paths are relative to this file).
calibration:
  focal_px: 800
  frame_width: 1920
  frame_height: 1080

class_heights:
  person: 1.7
  car: 1.5
  bus: 3.2
  truck: 3.0
  bicycle: 1.1
  traffic light: 0.9
  motorcycle: 1.3

presence_threshold: 0.001   # 0.1% per side
align_tolerance_ms: 50

# Bit addressing: LSB0 for little_endian, MSB0 (Motorola) for big_endian.
can_signals:
  speed:
    frame_id: 0x244
    start_bit: 0
    bit_length: 16
    byte_order: little_endian
    signed: false
    scale: 0.01
    offset: 0.0
    unit: km/h
  brake:
    frame_id: 0x1F0
    start_bit: 0
    bit_length: 1
    byte_order: little_endian
    signed: false
    scale: 1.0
    offset: 0.0
  steering:
    frame_id: 0x025
    start_bit: 0
    bit_length: 16
    byte_order: little_endian
    signed: true
    scale: 0.1
    offset: 0.0
    unit: deg

geocode:
  mode: fixture
  cache_path: geocode_fixtures.tsv
  rate_limit_per_s: 1.0

backends:
  - backend_id: mock-text
    kind: mock
    mock_delay_ms: 80
    mock_seed: 0
    mock_modality: text_only
  - backend_id: mock-vision
    kind: mock
    mock_delay_ms: 160
    mock_seed: 1
    mock_modality: multimodal

paths:
  records: scenarios.jsonl
  annotations: annotations.jsonl
"""


def build_records() -> list[SceneRecord]:
    records = [record_from_dict(obj) for obj in SCENARIOS]
    for record in records:
        violations = validate_record(record)
        if violations:
            raise SystemExit(f"{record.scenario_id}: fixture violates invariants: {violations}")
    return records


def build_can_log() -> str:
    base_s = 1_700_000_000.0
    lines = []
    for offset_ms, name, value in CAN_TIMELINE:
        spec = CAN_SIGNALS[name]
        payload = encode_signal(value, spec)
        lines.append(f"({base_s + offset_ms / 1000.0:.3f}) can0 {spec.frame_id:03X}#{payload.hex().upper()}")
    return "\n".join(lines) + "\n"


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "golden").mkdir(exist_ok=True)

    records = build_records()
    write_records(FIXTURES / "scenarios.jsonl", records)

    no_telemetry = dict(SCENARIOS[0])
    no_telemetry["timestamp_ms"] = 1_700_000_000_100  # after the last CAN sample
    no_telemetry["telemetry"] = None
    no_telemetry["geofix"] = dict(SCENARIOS[0]["geofix"], address=None)
    (FIXTURES / "scenario1_raw.jsonl").write_text(
        record_to_json_line(record_from_dict(no_telemetry)) + "\n", encoding="utf-8"
    )

    with open(FIXTURES / "annotations.jsonl", "w", encoding="utf-8") as fh:
        for obj in ANNOTATIONS:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")

    (FIXTURES / "can_table1.log").write_text(build_can_log(), encoding="utf-8")
    (FIXTURES / "geocode_fixtures.tsv").write_text(
        "".join(f"{key}\t{addr}\n" for key, addr in GEOCODE_TABLE), encoding="utf-8"
    )
    (FIXTURES / "pipeline.yaml").write_text(PIPELINE_YAML, encoding="utf-8")

    calib = CameraCalibration(focal_px=800.0, frame_width=FRAME_W, frame_height=FRAME_H)
    heights = ClassHeightTable()
    for record in records:
        if not all(d.annotated for d in record.detections):
            annotated = tuple(annotate_detections(record.detections, calib, heights))
            record = SceneRecord(
                scenario_id=record.scenario_id,
                timestamp_ms=record.timestamp_ms,
                frame_width=record.frame_width,
                frame_height=record.frame_height,
                detections=annotated,
                segmentation=record.segmentation,
                telemetry=record.telemetry,
                geofix=record.geofix,
                frame_ref=record.frame_ref,
            )
        prompt = render_prompt(record)
        out = FIXTURES / "golden" / f"{record.scenario_id}_prompt.txt"
        out.write_text(prompt.full_text, encoding="utf-8")
        print(f"{out.name}: digest {prompt_digest(prompt):#018x}")


if __name__ == "__main__":
    main()
