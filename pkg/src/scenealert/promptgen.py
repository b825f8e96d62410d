"""Render a scene record into the structured driver-alert prompt.

The prompt is plain UTF-8 text with four sections in fixed order:
Instruction, Vehicle, Location, Scene. The exact layout (whitespace,
separators, newlines) is pinned by the golden files under
fixtures/golden/; rendering is a pure function of (record, instruction)
and byte-identical across runs and platforms.

Numeric formats: confidences, distances and coverage percentages always
print with 2 decimals; speed prints as an integer; the steering angle
prints with trailing zeros trimmed, up to 5 decimals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import SceneRecord
from .segstats import summarize_for_prompt

DEFAULT_INSTRUCTION = (
    "Analyze the scene the vehicle is in, and quickly send an alert to the driver if necessary."
)

SECTION_ORDER = ("Instruction", "Vehicle", "Location", "Scene")

FNV64_OFFSET_BASIS = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptText:
    """Rendered prompt plus the start offset of each section."""

    full_text: str
    section_offsets: dict[str, int]

    def section_order(self) -> list[str]:
        return sorted(self.section_offsets, key=self.section_offsets.get)


def format_steering(angle_deg: float) -> str:
    text = f"{angle_deg:.5f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def detection_line(det) -> str:
    return (
        f"{det.class_label} (conf {det.confidence:.2f}) | "
        f"dist: {det.distance_m:.2f} m; region: {det.region}"
    )


def render_prompt(record: SceneRecord, instruction: str = DEFAULT_INSTRUCTION) -> PromptText:
    """Build the structured prompt for one annotated record.

    Detections must already carry distance and region. A missing address
    falls back to raw "lat, lon" (the caller is expected to have geocoded
    upstream).
    """
    if record.telemetry is None:
        raise PromptError(f"{record.scenario_id}: telemetry missing, run ingest first")
    unannotated = [d.class_label for d in record.detections if not d.annotated]
    if unannotated:
        raise PromptError(
            f"{record.scenario_id}: unannotated detections ({', '.join(unannotated)}); "
            "run distance annotation first"
        )

    tele = record.telemetry
    brake = "pressed" if tele.brake_pressed else "not pressed"
    vehicle = (
        f"Vehicle: Brake pedal = {brake} | Speed = {round(tele.speed_kmh)} km/h | "
        f"Steering angle = {format_steering(tele.steering_angle_deg)}°"
    )
    address = record.geofix.address or f"{record.geofix.lat}, {record.geofix.lon}"
    location = f"Location: {address}"

    ordered = sorted(
        enumerate(record.detections), key=lambda kv: (kv[1].distance_m, -kv[1].confidence, kv[0])
    )
    if ordered:
        detection_block = "Object Detection (YOLOv8)\n" + "\n".join(
            detection_line(det) for _i, det in ordered
        )
    else:
        detection_block = "Object Detection: none"
    seg_block = "Segmentation (Cityscapes)\n" + "\n".join(
        f"{label} {value}" for label, value in summarize_for_prompt(record.segmentation)
    )

    offsets: dict[str, int] = {}
    parts: list[str] = []
    pos = 0

    def add(section: str | None, text: str) -> None:
        nonlocal pos
        if section is not None:
            offsets[section] = pos
        parts.append(text)
        pos += len(text)

    add("Instruction", f"Instruction\n{instruction}\n")
    add(None, "\n")
    add("Vehicle", vehicle + "\n")
    add(None, "\n")
    add("Location", location + "\n")
    add(None, "\n")
    add("Scene", "Scene\n\n")
    add(None, detection_block + "\n")
    add(None, "\n")
    add(None, seg_block + "\n")
    return PromptText(full_text="".join(parts), section_offsets=offsets)


def prompt_digest(prompt: PromptText | str) -> int:
    """Stable 64-bit FNV-1a hash over the prompt's UTF-8 bytes."""
    text = prompt.full_text if isinstance(prompt, PromptText) else prompt
    digest = FNV64_OFFSET_BASIS
    for byte in text.encode("utf-8"):
        digest = ((digest ^ byte) * FNV64_PRIME) & _U64
    return digest
