import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"

sys.path.insert(0, str(REPO_ROOT / "src"))

from scenealert.ingest import parse_scene_records  # noqa: E402


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def scenario_stream():
    stream = parse_scene_records(FIXTURES / "scenarios.jsonl")
    assert not stream.diagnostics, stream.diagnostics
    assert len(stream) == 3
    return stream


@pytest.fixture()
def scenario1(scenario_stream):
    return scenario_stream.find("scenario1")


@pytest.fixture()
def scenario2(scenario_stream):
    return scenario_stream.find("scenario2")


@pytest.fixture()
def scenario3(scenario_stream):
    return scenario_stream.find("scenario3")
