import io

import pytest
from hypothesis import given, strategies as st

from scenealert.evaluation import (
    EvalError,
    EvalResult,
    latency_report,
    nearest_rank,
    parse_annotations,
    score,
    summarize,
)
from scenealert.model import Alert, HumanAnnotation

REFERENCE_S3_TEXT = (
    "Caution: On a wide urban avenue, pedestrians are present on both sidewalks and a "
    "bicycle is detected ahead-right at 11 meters. Reduce speed and cover the brake. "
    "Maintain lane discipline, as a car is very close on the left side at 4 meters and "
    "another vehicle is on the right at 10 meters. A traffic light is visible ahead, "
    "existing chances to stop."
)


def alert(text, risk=True, backend="mock-text", latency=100.0):
    return Alert(backend_id=backend, text=text, risk_flag=risk, latency_ms=latency)


def annotation(scenario="scenario3", risk=True, entities=("bicycle", "car", "traffic light")):
    return HumanAnnotation(scenario_id=scenario, risk=risk, critical_entities=tuple(entities))


def test_scenario3_reference_output_scores_full_coverage():
    result = score("scenario3", alert(REFERENCE_S3_TEXT), annotation())
    assert result.risk_match is True
    assert result.entity_coverage == 1.0


def test_vacuous_coverage_for_no_risk():
    result = score(
        "s", alert("No hazards detected.", risk=False), annotation("s", risk=False, entities=())
    )
    assert result.risk_match is True
    assert result.entity_coverage == 1.0


def test_synonyms_count():
    result = score("s", alert("watch the cyclist!"), annotation("s", entities=("bicycle",)))
    assert result.entity_coverage == 1.0


def test_word_boundary_blocks_substrings():
    result = score("s", alert("motorcade passing"), annotation("s", entities=("car",)))
    assert result.entity_coverage == 0.0


def test_multiword_entity():
    result = score("s", alert("a traffic light ahead"), annotation("s", entities=("traffic light",)))
    assert result.entity_coverage == 1.0


def test_scenario_mismatch_rejected():
    with pytest.raises(EvalError, match="mismatch"):
        score("other", alert("x"), annotation("s"))


def test_partial_coverage():
    result = score("s", alert("Warning: car close"), annotation("s", entities=("car", "bus")))
    assert result.entity_coverage == 0.5


@given(st.text(max_size=80))
def test_coverage_monotone_when_entity_added(extra):
    entities = ("car", "bus")
    base_text = "Warning: something"
    base = score("s", alert(base_text), annotation("s", entities=entities)).entity_coverage
    more = score("s", alert(base_text + " car " + extra), annotation("s", entities=entities)).entity_coverage
    assert more >= base


def test_nearest_rank_definition():
    assert nearest_rank([10.0], 50) == 10.0
    assert nearest_rank([10.0], 95) == 10.0
    assert nearest_rank([1.0, 2.0, 3.0, 4.0], 50) == 2.0
    assert nearest_rank([1.0, 2.0, 3.0, 4.0], 95) == 4.0
    data = sorted([5.0, 1.0, 9.0, 3.0, 7.0])
    assert nearest_rank(data, 50) in data


def results_for(samples):
    return [
        EvalResult(scenario_id=s, backend_id=b, latency_ms=lat) for s, b, lat in samples
    ]


KINDS = {"mock-text": "text_only", "mock-vision": "multimodal"}


def test_latency_report_single_sample():
    report = latency_report(results_for([("s1", "mock-text", 123.0)]), KINDS)
    row = report.rows[0]
    assert row.n == 1
    assert row.mean_ms == row.p50_ms == row.p95_ms == 123.0


def test_latency_report_grouping_and_order():
    samples = [
        ("scenario2", "mock-vision", 160.0),
        ("scenario1", "mock-text", 80.0),
        ("scenario1", "mock-vision", 170.0),
        ("scenario2", "mock-text", 90.0),
        ("scenario1", "mock-text", 84.0),
    ]
    report = latency_report(results_for(samples), KINDS)
    keys = [(r.scenario_id, r.kind) for r in report.rows]
    assert keys == [
        ("scenario1", "text_only"),
        ("scenario1", "multimodal"),
        ("scenario2", "text_only"),
        ("scenario2", "multimodal"),
    ]
    s1_text = report.row_for("scenario1", "text_only")
    assert s1_text.mean_ms == pytest.approx(82.0)
    assert 80.0 <= s1_text.p95_ms <= 84.0


def test_latency_mean_within_group_extremes():
    latencies = [100.0, 101.0, 140.0, 103.0]
    report = latency_report(results_for([("s", "mock-text", v) for v in latencies]), KINDS)
    row = report.rows[0]
    assert min(latencies) <= row.mean_ms <= max(latencies)
    assert row.p50_ms in latencies and row.p95_ms in latencies


def test_text_only_faster_than_multimodal_is_visible():
    samples = []
    for scenario in ("s1", "s2", "s3"):
        samples += [(scenario, "mock-text", 80.0 + i) for i in range(10)]
        samples += [(scenario, "mock-vision", 160.0 + i) for i in range(10)]
    report = latency_report(results_for(samples), KINDS)
    for scenario in ("s1", "s2", "s3"):
        text_row = report.row_for(scenario, "text_only")
        multi_row = report.row_for(scenario, "multimodal")
        assert text_row.mean_ms < multi_row.mean_ms


def test_summarize_text_and_csv_deterministic():
    results = [
        score("s1", alert("Warning: pedestrian and car", backend="m1"), annotation("s1", entities=("person", "car"))),
        score("s2", alert("No hazards detected.", risk=False, backend="m1"), annotation("s2", risk=False, entities=())),
    ]
    report = summarize(results)
    assert report.to_text() == summarize(results).to_text()
    assert report.matches == 2 and report.all_match
    csv_text = report.to_csv()
    assert csv_text.splitlines()[0] == "scenario,backend,risk,match,entity_coverage,latency_ms"
    assert len(csv_text.splitlines()) == 3


def test_summarize_empty_is_header_only():
    report = summarize([])
    assert report.all_match  # vacuously
    lines = report.to_text().splitlines()
    assert lines[0].startswith("Scenario")
    assert lines[-1] == "matched 0/0"


def test_summarize_counts_mismatches():
    results = [
        score("s1", alert("Warning: car", risk=True, backend="m"), annotation("s1", entities=("car",))),
        score("s2", alert("No hazards detected.", risk=False, backend="m"), annotation("s2", risk=True, entities=("car",))),
    ]
    report = summarize(results)
    assert report.matches == 1
    assert not report.all_match


def test_parse_annotations_fixture(fixtures_dir):
    annotations, diags = parse_annotations(fixtures_dir / "annotations.jsonl")
    assert diags == []
    assert set(annotations) == {"scenario1", "scenario2", "scenario3"}
    assert annotations["scenario3"].critical_entities == ("bicycle", "car", "traffic light")
    assert all(a.risk for a in annotations.values())


def test_parse_annotations_requires_entities_for_risk():
    lines = io.StringIO('{"scenario_id": "x", "risk": true, "critical_entities": []}\n')
    annotations, diags = parse_annotations(lines)
    assert annotations == {}
    assert len(diags) == 1
