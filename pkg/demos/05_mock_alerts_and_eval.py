#!/usr/bin/env python3
"""End-to-end offline run: prompts -> mock back ends -> scored report.

Two mock back ends (text-only 80 ms, multimodal 160 ms) stand in for
hosted models, so this runs with zero accounts and zero network.
"""

from dataclasses import replace
from pathlib import Path

from scenealert import annotate_detections, render_prompt
from scenealert.evaluation import parse_annotations, score, summarize
from scenealert.geometry import CameraCalibration
from scenealert.ingest import parse_scene_records
from scenealert.llm import BackendConfig, fan_out

fixtures = Path(__file__).resolve().parents[1] / "fixtures"
stream = parse_scene_records(fixtures / "scenarios.jsonl")
annotations, _diags = parse_annotations(fixtures / "annotations.jsonl")
calib = CameraCalibration(800.0, 1920, 1080)

backends = [
    BackendConfig("mock-text", "mock", mock_delay_ms=80, mock_seed=0),
    BackendConfig("mock-vision", "mock", mock_delay_ms=160, mock_seed=1, mock_modality="multimodal"),
]

results = []
for record in stream.records:
    if not all(d.annotated for d in record.detections):
        record = replace(record, detections=tuple(annotate_detections(record.detections, calib)))
    prompt = render_prompt(record)
    for alert in fan_out(prompt, None, backends):
        print(f"[{record.scenario_id} / {alert.backend_id}] {alert.latency_ms:.0f} ms")
        print(f"  {alert.text}")
        results.append(score(record.scenario_id, alert, annotations[record.scenario_id]))

print()
print(summarize(results).to_text())
