#!/usr/bin/env python3
"""Replay the fixture stream on a compressed clock, then benchmark the
mock back ends and print the per-scenario latency table.

The fixtures are 60 s apart; speed factor 600 compresses each gap to
100 ms, so the demo finishes in well under a second of sleeping.
"""

from dataclasses import replace
from pathlib import Path

from scenealert import annotate_detections, render_prompt
from scenealert.evaluation import EvalResult, latency_report
from scenealert.geometry import CameraCalibration
from scenealert.ingest import parse_scene_records, replay
from scenealert.llm import BackendConfig, fan_out

fixtures = Path(__file__).resolve().parents[1] / "fixtures"
stream = parse_scene_records(fixtures / "scenarios.jsonl")

print("replaying at x600 (original gaps 60 s -> 100 ms):")
report = replay(stream, 600.0, lambda r: print(f"  emitted {r.scenario_id}"))
print(f"max drift {report.max_abs_drift_ms:.1f} ms over {report.delivered} records\n")

backends = [
    BackendConfig("mock-text", "mock", mock_delay_ms=80, mock_seed=0),
    BackendConfig("mock-vision", "mock", mock_delay_ms=160, mock_seed=1, mock_modality="multimodal"),
]
kinds = {b.backend_id: b.effective_kind for b in backends}
calib = CameraCalibration(800.0, 1920, 1080)

samples = []
for record in stream.records:
    if not all(d.annotated for d in record.detections):
        record = replace(record, detections=tuple(annotate_detections(record.detections, calib)))
    prompt = render_prompt(record)
    for _rep in range(5):
        for alert in fan_out(prompt, None, backends):
            samples.append(EvalResult(record.scenario_id, alert.backend_id, alert.latency_ms))

print(latency_report(samples, kinds).to_text())
