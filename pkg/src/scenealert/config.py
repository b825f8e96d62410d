"""Pipeline configuration: one YAML file wires every stage.

Relative paths inside the file resolve against the file's own directory,
so a config can travel with its fixtures. Secrets never live in the
config; back ends name an environment variable instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import yaml

from .canbus import SignalSpec
from .geocode import GeocodeConfig
from .geometry import DEFAULT_CLASS_HEIGHTS_M, CameraCalibration, ClassHeightTable
from .ingest import DEFAULT_ALIGN_TOLERANCE_MS
from .llm import BackendConfig
from .model import DEFAULT_CLASS_SET
from .promptgen import DEFAULT_INSTRUCTION
from .segstats import DEFAULT_PRESENCE_THRESHOLD
from .evaluation import DEFAULT_SYNONYMS


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    calibration: CameraCalibration = field(default_factory=CameraCalibration)
    class_heights: ClassHeightTable = field(default_factory=ClassHeightTable)
    class_set: frozenset[str] = DEFAULT_CLASS_SET
    presence_threshold: float = DEFAULT_PRESENCE_THRESHOLD
    align_tolerance_ms: float = DEFAULT_ALIGN_TOLERANCE_MS
    can_signals: dict[str, SignalSpec] = field(default_factory=dict)
    geocode: GeocodeConfig = field(default_factory=GeocodeConfig)
    backends: list[BackendConfig] = field(default_factory=list)
    synonyms: Mapping[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_SYNONYMS))
    instruction: str = DEFAULT_INSTRUCTION
    records_path: Path | None = None
    annotations_path: Path | None = None
    source: Path | None = None

    def backend_by_id(self, backend_id: str) -> BackendConfig | None:
        for backend in self.backends:
            if backend.backend_id == backend_id:
                return backend
        return None


def _parse_signal(name: str, obj: dict) -> SignalSpec:
    try:
        return SignalSpec(
            name=name,
            frame_id=int(obj["frame_id"], 16) if isinstance(obj.get("frame_id"), str) else int(obj["frame_id"]),
            start_bit=int(obj.get("start_bit", 0)),
            bit_length=int(obj["bit_length"]),
            byte_order=str(obj.get("byte_order", "little_endian")),
            signed=bool(obj.get("signed", False)),
            scale=float(obj.get("scale", 1.0)),
            offset=float(obj.get("offset", 0.0)),
            unit=str(obj.get("unit", "")),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"can_signals.{name}: {exc}") from exc


def _parse_backend(obj: dict) -> BackendConfig:
    try:
        return BackendConfig(
            backend_id=str(obj["backend_id"]),
            kind=str(obj["kind"]),
            endpoint_url=str(obj.get("endpoint_url", "")),
            model_name=str(obj.get("model_name", "")),
            auth_env_var=str(obj.get("auth_env_var", "")),
            timeout_ms=float(obj.get("timeout_ms", 30_000)),
            max_retries=int(obj.get("max_retries", 2)),
            mock_delay_ms=None if obj.get("mock_delay_ms") is None else float(obj["mock_delay_ms"]),
            mock_seed=None if obj.get("mock_seed") is None else int(obj["mock_seed"]),
            mock_modality=str(obj.get("mock_modality", "text_only")),
            response_text_path=str(obj.get("response_text_path", "choices.0.message.content")),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"backends: {exc}") from exc


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a pipeline config file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = path.parent

    def resolve(p) -> Path:
        p = Path(str(p))
        return p if p.is_absolute() else (base / p)

    config = PipelineConfig(source=path)
    try:
        if "calibration" in raw:
            cal = raw["calibration"]
            config.calibration = CameraCalibration(
                focal_px=float(cal.get("focal_px", 800.0)),
                frame_width=int(cal.get("frame_width", 1920)),
                frame_height=int(cal.get("frame_height", 1080)),
            )
        if "class_heights" in raw:
            heights = dict(DEFAULT_CLASS_HEIGHTS_M)
            heights.update({str(k): float(v) for k, v in raw["class_heights"].items()})
            config.class_heights = ClassHeightTable(heights_m=heights)
        if "class_set" in raw:
            config.class_set = frozenset(str(c) for c in raw["class_set"])
        if "presence_threshold" in raw:
            config.presence_threshold = float(raw["presence_threshold"])
        if "align_tolerance_ms" in raw:
            config.align_tolerance_ms = float(raw["align_tolerance_ms"])
        for name, spec in (raw.get("can_signals") or {}).items():
            config.can_signals[str(name)] = _parse_signal(str(name), spec)
        if "geocode" in raw:
            geo = raw["geocode"]
            cache = geo.get("cache_path")
            config.geocode = GeocodeConfig(
                url_template=str(geo.get("url_template", "")),
                response_field_path=str(geo.get("response_field_path", "display_name")),
                rate_limit_per_s=float(geo.get("rate_limit_per_s", 1.0)),
                cache_path=resolve(cache) if cache else None,
                mode=str(geo.get("mode", "fixture")),
            )
        config.backends = [_parse_backend(b) for b in raw.get("backends") or []]
        if "synonyms" in raw:
            config.synonyms = {
                str(k).lower(): tuple(str(t) for t in v) for k, v in raw["synonyms"].items()
            }
        if "instruction" in raw:
            config.instruction = str(raw["instruction"])
        paths = raw.get("paths") or {}
        if "records" in paths:
            config.records_path = resolve(paths["records"])
        if "annotations" in paths:
            config.annotations_path = resolve(paths["annotations"])
    except ConfigError:
        raise
    except (ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for label, ref in (("paths.records", config.records_path), ("paths.annotations", config.annotations_path)):
        if ref is not None and not ref.exists():
            raise ConfigError(f"{label} points to missing file {ref}")
    if config.geocode.cache_path and not Path(config.geocode.cache_path).parent.exists():
        raise ConfigError(f"geocode.cache_path directory missing: {config.geocode.cache_path}")
    return config
