"""Score alerts against human annotations; aggregate latency statistics.

Entity matching is mechanical: an annotated critical entity counts as
covered when its canonical token or any synonym appears in the alert
text as a whole word (case-insensitive). The synonym map is data, so it
can grow without code changes. Percentiles are nearest-rank, so every
reported percentile is an actual sample.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .model import Alert, Diagnostic, HumanAnnotation

DEFAULT_SYNONYMS: Mapping[str, tuple[str, ...]] = {
    "person": ("persons", "people", "pedestrian", "pedestrians"),
    "car": ("cars",),
    "bus": ("buses",),
    "truck": ("trucks",),
    "bicycle": ("bicycles", "bike", "bikes", "cyclist", "cyclists"),
    "motorcycle": ("motorcycles", "motorbike", "motorbikes"),
    "traffic light": ("traffic lights", "traffic signal", "traffic signals", "signal", "signals", "stoplight"),
}

# Display order for modality groups in latency tables.
KIND_ORDER = {"text_only": 0, "multimodal": 1}
KIND_LABELS = {"text_only": "text-only", "multimodal": "multimodal"}


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class EvalResult:
    scenario_id: str
    backend_id: str
    latency_ms: float
    risk_match: bool | None = None
    entity_coverage: float | None = None
    alert_risk: bool | None = None


def _mentioned(text: str, entity: str, synonyms: Mapping[str, tuple[str, ...]]) -> bool:
    tokens = (entity, *synonyms.get(entity.lower(), ()))
    return any(re.search(rf"\b{re.escape(tok)}\b", text, re.IGNORECASE) for tok in tokens)


def score(
    scenario_id: str,
    alert: Alert,
    annotation: HumanAnnotation,
    synonyms: Mapping[str, tuple[str, ...]] = DEFAULT_SYNONYMS,
) -> EvalResult:
    """Score one alert against the annotation for the same scenario.

    Coverage over zero critical entities is vacuously 1.0 (correct
    silence is not penalized).
    """
    if scenario_id != annotation.scenario_id:
        raise EvalError(
            f"scenario mismatch: alert is for {scenario_id!r}, annotation for {annotation.scenario_id!r}"
        )
    entities = annotation.critical_entities
    if entities:
        covered = sum(1 for entity in entities if _mentioned(alert.text, entity, synonyms))
        coverage = covered / len(entities)
    else:
        coverage = 1.0
    return EvalResult(
        scenario_id=scenario_id,
        backend_id=alert.backend_id,
        latency_ms=alert.latency_ms,
        risk_match=alert.risk_flag == annotation.risk,
        entity_coverage=coverage,
        alert_risk=alert.risk_flag,
    )


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile: always a member of the sample."""
    if not sorted_values:
        raise EvalError("percentile of empty sample")
    rank = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class LatencyRow:
    scenario_id: str
    kind: str
    n: int
    mean_ms: float
    p50_ms: float
    p95_ms: float


@dataclass(frozen=True)
class LatencyReport:
    rows: tuple[LatencyRow, ...]

    def row_for(self, scenario_id: str, kind: str) -> LatencyRow | None:
        for row in self.rows:
            if row.scenario_id == scenario_id and row.kind == kind:
                return row
        return None

    def to_text(self) -> str:
        header = f"{'Scenario':<12} {'Kind':<11} {'n':>4} {'mean ms':>9} {'p50 ms':>9} {'p95 ms':>9}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.scenario_id:<12} {KIND_LABELS.get(row.kind, row.kind):<11} {row.n:>4} "
                f"{row.mean_ms:>9.1f} {row.p50_ms:>9.1f} {row.p95_ms:>9.1f}"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scenario", "kind", "n", "mean_ms", "p50_ms", "p95_ms"])
        for row in self.rows:
            writer.writerow(
                [
                    row.scenario_id,
                    KIND_LABELS.get(row.kind, row.kind),
                    row.n,
                    f"{row.mean_ms:.3f}",
                    f"{row.p50_ms:.3f}",
                    f"{row.p95_ms:.3f}",
                ]
            )
        return buf.getvalue()


def latency_report(
    results: Iterable[EvalResult], backend_kinds: Mapping[str, str]
) -> LatencyReport:
    """Aggregate latencies grouped by scenario and back-end kind.

    ``backend_kinds`` maps backend_id to its effective modality. Rows
    order by scenario then kind (text-only before multimodal).
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for result in results:
        kind = backend_kinds.get(result.backend_id, "unknown")
        groups.setdefault((result.scenario_id, kind), []).append(result.latency_ms)
    rows = []
    for (scenario_id, kind), latencies in groups.items():
        latencies.sort()
        rows.append(
            LatencyRow(
                scenario_id=scenario_id,
                kind=kind,
                n=len(latencies),
                mean_ms=fmean(latencies),
                p50_ms=nearest_rank(latencies, 50),
                p95_ms=nearest_rank(latencies, 95),
            )
        )
    rows.sort(key=lambda r: (r.scenario_id, KIND_ORDER.get(r.kind, 99), r.kind))
    return LatencyReport(rows=tuple(rows))


def _fmt_opt(value, fmt: str = "{}") -> str:
    return "-" if value is None else fmt.format(value)


@dataclass(frozen=True)
class EvalReport:
    results: tuple[EvalResult, ...]

    @property
    def matches(self) -> int:
        return sum(1 for r in self.results if r.risk_match)

    @property
    def all_match(self) -> bool:
        return all(r.risk_match for r in self.results)

    def to_text(self) -> str:
        header = (
            f"{'Scenario':<12} {'Backend':<14} {'Risk?':<6} {'Match':<6} "
            f"{'Entity coverage':<16} {'Latency ms':>10}"
        )
        lines = [header, "-" * len(header)]
        for r in sorted(self.results, key=lambda r: (r.scenario_id, r.backend_id)):
            lines.append(
                f"{r.scenario_id:<12} {r.backend_id:<14} "
                f"{_fmt_opt(None if r.alert_risk is None else ('yes' if r.alert_risk else 'no')):<6} "
                f"{_fmt_opt(None if r.risk_match is None else ('yes' if r.risk_match else 'NO')):<6} "
                f"{_fmt_opt(r.entity_coverage, '{:.2f}'):<16} {r.latency_ms:>10.1f}"
            )
        lines.append(f"matched {self.matches}/{len(self.results)}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scenario", "backend", "risk", "match", "entity_coverage", "latency_ms"])
        for r in sorted(self.results, key=lambda r: (r.scenario_id, r.backend_id)):
            writer.writerow(
                [
                    r.scenario_id,
                    r.backend_id,
                    _fmt_opt(r.alert_risk),
                    _fmt_opt(r.risk_match),
                    _fmt_opt(r.entity_coverage, "{:.4f}"),
                    f"{r.latency_ms:.3f}",
                ]
            )
        return buf.getvalue()


def summarize(results: Iterable[EvalResult]) -> EvalReport:
    """Deterministic report over a result set (text or CSV rendering)."""
    return EvalReport(results=tuple(results))


def parse_annotations(
    source: str | Path | Iterable[str],
) -> tuple[dict[str, HumanAnnotation], list[Diagnostic]]:
    """Load line-delimited annotation records keyed by scenario id."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = list(source)
    annotations: dict[str, HumanAnnotation] = {}
    diagnostics: list[Diagnostic] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
            annotation = HumanAnnotation(
                scenario_id=str(obj["scenario_id"]),
                risk=bool(obj["risk"]),
                critical_entities=tuple(str(e) for e in obj.get("critical_entities", [])),
                summary=str(obj.get("summary", "")),
            )
        except (ValueError, TypeError, KeyError) as exc:
            diagnostics.append(Diagnostic(line_no, f"malformed annotation: {exc}"))
            continue
        if annotation.risk and not annotation.critical_entities:
            diagnostics.append(
                Diagnostic(line_no, f"{annotation.scenario_id}: risk=true requires critical entities")
            )
            continue
        annotations[annotation.scenario_id] = annotation
    return annotations, diagnostics
