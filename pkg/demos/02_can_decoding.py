#!/usr/bin/env python3
"""Decode the committed CAN fixture log into telemetry.

Signals are declarative bit slices with linear scaling; the brake flag
is pressed whenever its raw value is nonzero. Run from the repo root.
"""

from pathlib import Path

from scenealert.canbus import SignalSpec, decode_telemetry, parse_can_log, telemetry_stream

SIGNALS = {
    "speed": SignalSpec("speed", 0x244, 0, 16, "little_endian", False, 0.01, 0.0, "km/h"),
    "brake": SignalSpec("brake", 0x1F0, 0, 1, "little_endian", False, 1.0, 0.0),
    "steering": SignalSpec("steering", 0x025, 0, 16, "little_endian", True, 0.1, 0.0, "deg"),
}

log_path = Path(__file__).resolve().parents[1] / "fixtures" / "can_table1.log"
with open(log_path, encoding="utf-8") as fh:
    frames, diagnostics = parse_can_log(fh)

print(f"{log_path.name}: {len(frames)} frames, {len(diagnostics)} diagnostics")
for frame in frames:
    print(f"  t={frame.timestamp_ms:.0f} ms  id=0x{frame.frame_id:03X}  data={frame.data.hex()}")

telemetry = decode_telemetry(frames, SIGNALS)
print(
    f"\nlatest state: {telemetry.speed_kmh:g} km/h, "
    f"brake {'pressed' if telemetry.brake_pressed else 'not pressed'}, "
    f"steering {telemetry.steering_angle_deg:g} deg"
)

print("\nsnapshots as the bus state evolved:")
for ts, sample in telemetry_stream(frames, SIGNALS):
    print(f"  t={ts:.0f} ms -> {sample.speed_kmh:g} km/h, brake={sample.brake_pressed}")
