import pytest
from hypothesis import given, strategies as st

from scenealert.geometry import CameraCalibration, annotate_detections
from scenealert.ingest import record_to_dict, record_from_dict
from scenealert.model import SceneRecord
from scenealert.promptgen import (
    DEFAULT_INSTRUCTION,
    FNV64_OFFSET_BASIS,
    PromptError,
    PromptText,
    format_steering,
    prompt_digest,
    render_prompt,
)

GOLDEN_DIGESTS = {
    "scenario1": 0xFE367798DC66FA51,
    "scenario2": 0x10540C34D777C675,
    "scenario3": 0x0C306912916932FD,
}


def annotated(record: SceneRecord) -> SceneRecord:
    if all(d.annotated for d in record.detections):
        return record
    calib = CameraCalibration(800.0, record.frame_width, record.frame_height)
    obj = record_to_dict(record)
    obj["detections"] = [
        {
            "class_label": d.class_label,
            "confidence": d.confidence,
            "bbox": [d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2],
            "distance_m": d.distance_m,
            "region": d.region,
        }
        for d in annotate_detections(record.detections, calib)
    ]
    return record_from_dict(obj)


@pytest.mark.parametrize("scenario_id", ["scenario1", "scenario2", "scenario3"])
def test_golden_prompts_byte_for_byte(scenario_id, scenario_stream, fixtures_dir):
    record = annotated(scenario_stream.find(scenario_id))
    prompt = render_prompt(record)
    golden = (fixtures_dir / "golden" / f"{scenario_id}_prompt.txt").read_text(encoding="utf-8")
    assert prompt.full_text == golden
    assert prompt_digest(prompt) == GOLDEN_DIGESTS[scenario_id]


def test_scenario1_contains_reference_lines(scenario1):
    text = render_prompt(annotated(scenario1)).full_text
    assert "person (conf 0.89) | dist: 5.99 m; region: right" in text
    assert "Road (global) 35.07%" in text
    assert "Sidewalk Left = False; Right = False" in text


def test_scenario2_leads_with_the_bus(scenario2):
    text = render_prompt(annotated(scenario2)).full_text
    first_object = text.split("Object Detection (YOLOv8)\n")[1].splitlines()[0]
    assert first_object == "bus (conf 0.96) | dist: 2.26 m; region: left"
    assert "Sidewalk Left = True (0.21%); Right = True (0.47%)" in text


def test_zero_detections_render_none(scenario1):
    obj = record_to_dict(scenario1)
    obj["detections"] = []
    text = render_prompt(record_from_dict(obj)).full_text
    assert "Object Detection: none" in text
    assert "YOLOv8" not in text


def test_sections_in_order_exactly_once(scenario2):
    prompt = render_prompt(annotated(scenario2))
    assert prompt.section_order() == ["Instruction", "Vehicle", "Location", "Scene"]
    offsets = prompt.section_offsets
    assert offsets["Instruction"] == 0
    assert list(offsets.values()) == sorted(offsets.values())
    for marker in ("Instruction\n", "Vehicle:", "Location:", "Scene\n"):
        assert prompt.full_text.count(marker) == 1
    for section, offset in offsets.items():
        assert prompt.full_text[offset:].startswith(section)


def test_rendering_is_deterministic(scenario3):
    record = annotated(scenario3)
    a = render_prompt(record)
    b = render_prompt(record)
    assert a.full_text == b.full_text
    assert prompt_digest(a) == prompt_digest(b)


def test_object_lines_nondecreasing_distance(scenario3):
    text = render_prompt(annotated(scenario3)).full_text
    block = text.split("Object Detection (YOLOv8)\n")[1].split("\n\nSegmentation")[0]
    distances = [float(line.split("dist: ")[1].split(" m;")[0]) for line in block.splitlines()]
    assert distances == sorted(distances)
    assert len(distances) == 13


def test_unannotated_detections_rejected(scenario1):
    with pytest.raises(PromptError, match="unannotated"):
        render_prompt(scenario1)  # fixture scenario1 carries raw boxes


def test_missing_telemetry_rejected(scenario1):
    obj = record_to_dict(annotated(scenario1))
    obj["telemetry"] = None
    with pytest.raises(PromptError, match="telemetry"):
        render_prompt(record_from_dict(obj))


def test_missing_address_falls_back_to_coordinates(scenario1):
    obj = record_to_dict(annotated(scenario1))
    obj["geofix"]["address"] = None
    text = render_prompt(record_from_dict(obj)).full_text
    assert "Location: -25.0945, -50.1633" in text


def test_custom_instruction():
    prompt_default = DEFAULT_INSTRUCTION
    assert prompt_default.startswith("Analyze the scene")


@pytest.mark.parametrize(
    "angle,expected",
    [(-0.00065, "-0.00065"), (-1.0151, "-1.0151"), (-0.5, "-0.5"), (0.0, "0"), (12.0, "12"),
     (-0.000001, "0")],
)
def test_steering_format(angle, expected):
    assert format_steering(angle) == expected


def test_digest_of_empty_string_is_offset_basis():
    assert prompt_digest("") == FNV64_OFFSET_BASIS


def test_digest_known_vector():
    # FNV-1a 64 of "a" per the published reference implementation.
    assert prompt_digest("a") == 0xAF63DC4C8601EC8C


@given(st.text(max_size=200))
def test_digest_is_stable_64_bit(text):
    digest = prompt_digest(text)
    assert 0 <= digest < 2**64
    assert digest == prompt_digest(text)
