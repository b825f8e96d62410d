"""Operator entry point: scenealert <subcommand>.

Exit code contract (stable): 0 success, 1 evaluation or content failure,
2 usage/config error. All subcommands honor --config, --verbose and
--format {text,csv}.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import canbus, evaluation, geocode, ingest, llm, promptgen
from .config import ConfigError, PipelineConfig, load_config
from .geometry import annotate_detections
from .model import Alert, GeoFix, SceneRecord

logger = logging.getLogger("scenealert")

EXIT_OK = 0
EXIT_CONTENT = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Usage or configuration problem (exit 2)."""


def _emit_diagnostics(diagnostics, source: str) -> None:
    for diag in diagnostics:
        print(f"{source}: {diag}", file=sys.stderr)


def _load_records(args, config: PipelineConfig, allow_missing_telemetry: bool = False) -> ingest.RecordStream:
    records_path = Path(args.records) if getattr(args, "records", None) else config.records_path
    if records_path is None:
        raise CliError("no records file: pass a path or set paths.records in the config")
    if not records_path.exists():
        raise CliError(f"records file {records_path} does not exist")
    stream = ingest.parse_scene_records(
        records_path,
        strict=getattr(args, "strict", False),
        allow_missing_telemetry=allow_missing_telemetry,
    )
    _emit_diagnostics(stream.diagnostics, str(records_path))
    return stream


def _annotated(record: SceneRecord, config: PipelineConfig) -> SceneRecord:
    if all(d.annotated for d in record.detections):
        return record
    detections = annotate_detections(record.detections, config.calibration, config.class_heights)
    return SceneRecord(
        scenario_id=record.scenario_id,
        timestamp_ms=record.timestamp_ms,
        frame_width=record.frame_width,
        frame_height=record.frame_height,
        detections=tuple(detections),
        segmentation=record.segmentation,
        telemetry=record.telemetry,
        geofix=record.geofix,
        frame_ref=record.frame_ref,
    )


def _selected_backends(args, config: PipelineConfig) -> list[llm.BackendConfig]:
    if not config.backends:
        raise CliError("no back ends configured")
    wanted = getattr(args, "backends", None)
    if not wanted:
        return config.backends
    ids = [b.strip() for b in wanted.split(",") if b.strip()]
    selected = []
    for backend_id in ids:
        backend = config.backend_by_id(backend_id)
        if backend is None:
            raise CliError(f"unknown back end {backend_id!r}")
        selected.append(backend)
    return selected


def _frame_bytes(record: SceneRecord, config: PipelineConfig) -> bytes | None:
    if not record.frame_ref:
        return None
    frame = Path(record.frame_ref)
    if not frame.is_absolute() and config.source is not None:
        frame = config.source.parent / frame
    return frame.read_bytes() if frame.exists() else None


def cmd_ingest(args, config: PipelineConfig) -> int:
    stream = _load_records(args, config, allow_missing_telemetry=True)
    tolerance = args.tolerance_ms if args.tolerance_ms is not None else config.align_tolerance_ms

    samples: list[tuple[float, object]] = []
    if args.can_log:
        if not config.can_signals:
            raise CliError("--can-log given but no can_signals in the config")
        with open(args.can_log, "r", encoding="utf-8", errors="replace") as fh:
            frames, diags = canbus.parse_can_log(fh)
        _emit_diagnostics(diags, args.can_log)
        if args.strict and diags:
            return EXIT_CONTENT
        samples = canbus.telemetry_stream(frames, config.can_signals)

    geocoder = None
    output: list[SceneRecord] = []
    failures = 0
    for record in stream.records:
        telemetry = record.telemetry
        if telemetry is not None and samples:
            print(
                f"{record.scenario_id}: record carries telemetry; CAN log ignored for it",
                file=sys.stderr,
            )
        if telemetry is None:
            if not samples:
                failures += 1
                print(f"{record.scenario_id}: no telemetry and no usable CAN log", file=sys.stderr)
                continue
            pair = ingest.align([(float(record.timestamp_ms), record)], samples, tolerance)[0]
            if not pair.aligned:
                failures += 1
                print(
                    f"{record.scenario_id}: no telemetry sample within {tolerance} ms",
                    file=sys.stderr,
                )
                continue
            telemetry = pair.telemetry
        geofix = record.geofix
        if geofix.address is None and config.geocode.cache_path is not None:
            if geocoder is None:
                geocoder = geocode.ReverseGeocoder(config.geocode)
            try:
                geofix = GeoFix(geofix.lat, geofix.lon, geocoder.reverse(geofix))
            except geocode.GeocodeError as exc:
                print(f"{record.scenario_id}: geocoding failed: {exc}", file=sys.stderr)
        output.append(
            SceneRecord(
                scenario_id=record.scenario_id,
                timestamp_ms=record.timestamp_ms,
                frame_width=record.frame_width,
                frame_height=record.frame_height,
                detections=record.detections,
                segmentation=record.segmentation,
                telemetry=telemetry,
                geofix=geofix,
                frame_ref=record.frame_ref,
            )
        )

    if args.out:
        ingest.write_records(args.out, output)
    else:
        for record in output:
            print(ingest.record_to_json_line(record))
    if not output and not stream.records:
        print("warning: empty record stream", file=sys.stderr)
    if args.strict and (failures or stream.diagnostics):
        return EXIT_CONTENT
    return EXIT_OK


def cmd_prompt(args, config: PipelineConfig) -> int:
    stream = _load_records(args, config)
    if args.scenario_id:
        record = stream.find(args.scenario_id)
        if record is None:
            raise CliError(f"unknown record id {args.scenario_id!r}")
        records = [record]
    elif args.all:
        records = stream.records
    else:
        raise CliError("pass a scenario id or --all")
    for record in records:
        prompt = promptgen.render_prompt(_annotated(record, config), config.instruction)
        if args.out_dir:
            out = Path(args.out_dir) / f"{record.scenario_id}_prompt.txt"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(prompt.full_text, encoding="utf-8")
            logger.info("wrote %s (digest %016x)", out, promptgen.prompt_digest(prompt))
        else:
            sys.stdout.write(prompt.full_text)
    return EXIT_OK


def _alert_to_line(scenario_id: str, result: Alert | llm.DispatchFailure) -> str:
    if isinstance(result, llm.DispatchFailure):
        return json.dumps(
            {"scenario_id": scenario_id, "backend_id": result.backend_id, "error": result.message}
        )
    return json.dumps(
        {
            "scenario_id": scenario_id,
            "backend_id": result.backend_id,
            "text": result.text,
            "risk_flag": result.risk_flag,
            "latency_ms": result.latency_ms,
        },
        ensure_ascii=False,
    )


def cmd_run(args, config: PipelineConfig) -> int:
    stream = _load_records(args, config)
    backends = _selected_backends(args, config)
    lines = []
    alerts = 0
    for record in stream.records:
        prompt = promptgen.render_prompt(_annotated(record, config), config.instruction)
        image = _frame_bytes(record, config)
        try:
            results = llm.fan_out(prompt, image, backends)
        except llm.AllBackendsFailed as exc:
            results = list(exc.failures)
        for result in results:
            if isinstance(result, Alert):
                alerts += 1
            else:
                print(f"{record.scenario_id}: {result.backend_id}: {result.message}", file=sys.stderr)
            lines.append(_alert_to_line(record.scenario_id, result))
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if stream.records and alerts == 0:
        return EXIT_CONTENT
    return EXIT_OK


def _load_alerts(path: str) -> list[tuple[str, Alert]]:
    out: list[tuple[str, Alert]] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise CliError(f"{path}:{line_no}: bad alert line: {exc}") from exc
        if "error" in obj:
            print(f"{obj.get('scenario_id')}: skipping failed dispatch ({obj['error']})", file=sys.stderr)
            continue
        out.append(
            (
                str(obj["scenario_id"]),
                Alert(
                    backend_id=str(obj["backend_id"]),
                    text=str(obj["text"]),
                    risk_flag=bool(obj["risk_flag"]),
                    latency_ms=float(obj["latency_ms"]),
                ),
            )
        )
    return out


def cmd_eval(args, config: PipelineConfig) -> int:
    annotations_path = Path(args.annotations) if args.annotations else config.annotations_path
    if annotations_path is None or not annotations_path.exists():
        raise CliError("annotations file missing")
    annotations, diags = evaluation.parse_annotations(annotations_path)
    _emit_diagnostics(diags, str(annotations_path))
    pairs = _load_alerts(args.alerts)
    results = []
    for scenario_id, alert in pairs:
        annotation = annotations.get(scenario_id)
        if annotation is None:
            raise CliError(f"no annotation for scenario {scenario_id!r}")
        results.append(evaluation.score(scenario_id, alert, annotation, config.synonyms))
    report = evaluation.summarize(results)
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_text())
    return EXIT_OK if report.all_match else EXIT_CONTENT


def cmd_bench(args, config: PipelineConfig) -> int:
    if args.repetitions <= 0:
        raise CliError("--repetitions must be positive")
    stream = _load_records(args, config)
    backends = _selected_backends(args, config)
    results: list[evaluation.EvalResult] = []
    failures = 0
    for _rep in range(args.repetitions):
        for record in stream.records:
            prompt = promptgen.render_prompt(_annotated(record, config), config.instruction)
            image = _frame_bytes(record, config)
            try:
                outcome = llm.fan_out(prompt, image, backends)
            except llm.AllBackendsFailed as exc:
                failures += len(exc.failures)
                continue
            for result in outcome:
                if isinstance(result, Alert):
                    results.append(
                        evaluation.EvalResult(
                            scenario_id=record.scenario_id,
                            backend_id=result.backend_id,
                            latency_ms=result.latency_ms,
                        )
                    )
                else:
                    failures += 1
    kinds = {b.backend_id: b.effective_kind for b in backends}
    report = evaluation.latency_report(results, kinds)
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_text())
    if failures and not results:
        return EXIT_CONTENT
    return EXIT_OK


def cmd_replay(args, config: PipelineConfig) -> int:
    factor = args.speed_factor
    if math.isnan(factor) or factor <= 0:
        raise CliError(f"speed factor must be positive, got {factor}")
    stream = _load_records(args, config)
    if not stream.records:
        raise CliError("nothing to replay: record stream is empty")
    sink = None
    try:
        if args.tcp:
            host, _, port = args.tcp.rpartition(":")
            if not host or not port.isdigit():
                raise CliError(f"bad --tcp target {args.tcp!r} (expected host:port)")
            try:
                sink = ingest.TcpLineSink(host, int(port))
            except OSError as exc:
                raise CliError(f"cannot connect to {args.tcp}: {exc}") from exc
            consumer = sink
        else:
            consumer = lambda record: print(ingest.record_to_json_line(record))
        report = ingest.replay(stream, factor, consumer)
    finally:
        if sink is not None:
            sink.close()
    print(
        f"replayed {report.delivered}/{len(stream.records)} records at x{factor:g}, "
        f"max drift {report.max_abs_drift_ms:.1f} ms",
        file=sys.stderr,
    )
    return EXIT_OK if report.completed else EXIT_CONTENT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenealert",
        description="Driving-scene prompt pipeline: ingest, prompt, run, eval, bench, replay.",
    )
    parser.add_argument("--config", help="pipeline config file (YAML)")
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    parser.add_argument("--format", choices=("text", "csv"), default="text", help="report format")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate records, merge CAN telemetry, geocode")
    p.add_argument("records", nargs="?", help="line-delimited record file")
    p.add_argument("--can-log", help="candump-style CAN log to merge")
    p.add_argument("--tolerance-ms", type=float, default=None, help="alignment tolerance")
    p.add_argument("--out", help="write validated stream here (default stdout)")
    p.add_argument("--strict", action="store_true", help="exit 1 on any diagnostic")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("prompt", help="render structured prompts")
    p.add_argument("scenario_id", nargs="?", help="record id to render")
    p.add_argument("--all", action="store_true", help="render every record")
    p.add_argument("--records", help="record file (defaults to config paths.records)")
    p.add_argument("--out-dir", help="write <id>_prompt.txt files instead of stdout")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("run", help="dispatch prompts to back ends, write alerts")
    p.add_argument("records", nargs="?", help="record file")
    p.add_argument("--backends", help="comma-separated backend ids (default: all)")
    p.add_argument("--out", help="alerts file (default stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score an alerts file against annotations")
    p.add_argument("alerts", help="alerts file from `run`")
    p.add_argument("--annotations", help="annotation file (defaults to config paths.annotations)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="repeat dispatches and report latency stats")
    p.add_argument("records", nargs="?", help="record file")
    p.add_argument("--backends", help="comma-separated backend ids (default: all)")
    p.add_argument("--repetitions", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-emit records on their original schedule")
    p.add_argument("records", nargs="?", help="record file")
    p.add_argument("--speed-factor", type=float, default=1.0, help="time scale; inf = no sleep")
    p.add_argument("--tcp", help="emit to host:port instead of stdout")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        config = load_config(args.config) if args.config else PipelineConfig()
        return args.func(args, config)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ingest.RecordParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTENT


if __name__ == "__main__":
    sys.exit(main())
