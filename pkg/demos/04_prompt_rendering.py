#!/usr/bin/env python3
"""Render the structured prompt for every committed scenario and show
its digest (FNV-1a 64, the golden-test anchor). Run from the repo root.
"""

from pathlib import Path

from scenealert import annotate_detections, prompt_digest, render_prompt
from scenealert.geometry import CameraCalibration
from scenealert.ingest import parse_scene_records
from dataclasses import replace

fixtures = Path(__file__).resolve().parents[1] / "fixtures"
stream = parse_scene_records(fixtures / "scenarios.jsonl")
calib = CameraCalibration(800.0, 1920, 1080)

for record in stream.records:
    if not all(d.annotated for d in record.detections):
        record = replace(record, detections=tuple(annotate_detections(record.detections, calib)))
    prompt = render_prompt(record)
    print("=" * 72)
    print(f"{record.scenario_id}  (digest {prompt_digest(prompt):016x})")
    print("=" * 72)
    print(prompt.full_text)
