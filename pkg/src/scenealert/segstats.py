"""Per-side class coverage statistics over segmentation label maps.

The frame splits into two halves along the vertical axis: the left half
takes columns [0, W//2), the right half the remainder, so on odd widths
the midline column belongs to the right half (same tie-break as region
assignment). All fractions are exact rationals of pixel counts;
percentages appear only at render time.

Label maps travel as 8-bit single-channel PGM (P5) files with a JSON
sidecar mapping class id to class name (``<map>.classes.json`` next to
``<map>.pgm`` unless given explicitly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .model import SegClassStat, SegmentationSummary

# Smallest per-side fraction that counts as "present". 0.1% sits below
# every printed sidewalk coverage in the reference scenes.
DEFAULT_PRESENCE_THRESHOLD = 0.001

# Class order used when emitting segmentation rows into a prompt; classes
# not listed here follow alphabetically.
CANONICAL_PROMPT_ORDER = ("road", "sidewalk", "person", "building", "vegetation", "terrain")

_DISPLAY_NAMES = {"person": "Pedestrians", "road": "Road (global)"}


class SegStatsError(ValueError):
    pass


class DegenerateFrameError(SegStatsError):
    """Frame too narrow to split into halves."""


@dataclass(frozen=True)
class LabelMap:
    """Row-major grid of class ids plus the id -> name table."""

    width: int
    height: int
    cells: np.ndarray  # shape (height, width), uint8
    class_names: dict[int, str]

    def __post_init__(self) -> None:
        if self.cells.shape != (self.height, self.width):
            raise SegStatsError(
                f"cells shape {self.cells.shape} does not match {self.height}x{self.width}"
            )
        present = set(np.unique(self.cells).tolist())
        unnamed = present - set(self.class_names)
        if unnamed:
            raise SegStatsError(f"cells contain unnamed class ids: {sorted(unnamed)}")


def read_pgm(path: str | Path) -> tuple[int, int, bytes]:
    """Read a binary (P5) PGM with maxval <= 255; returns (w, h, pixels)."""
    blob = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(blob):
        # skip whitespace and '#' comments between header tokens
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if pos > start:
            tokens.append(blob[start:pos])
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise SegStatsError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise SegStatsError(f"{path}: 16-bit PGM not supported (maxval {maxval})")
    pixels = blob[pos + 1 : pos + 1 + width * height]
    if len(pixels) != width * height:
        raise SegStatsError(f"{path}: expected {width * height} pixels, got {len(pixels)}")
    return width, height, pixels


def write_pgm(path: str | Path, width: int, height: int, pixels: bytes | np.ndarray) -> None:
    raw = pixels.tobytes() if isinstance(pixels, np.ndarray) else bytes(pixels)
    if len(raw) != width * height:
        raise SegStatsError(f"pixel buffer has {len(raw)} bytes, expected {width * height}")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(raw)


def sidecar_path(map_path: str | Path) -> Path:
    return Path(map_path).with_suffix(".classes.json")


def read_label_map(map_path: str | Path, classes_path: str | Path | None = None) -> LabelMap:
    """Load a PGM label map and its class-name sidecar."""
    width, height, pixels = read_pgm(map_path)
    classes_path = Path(classes_path) if classes_path else sidecar_path(map_path)
    try:
        table = json.loads(Path(classes_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SegStatsError(f"missing class table {classes_path}") from None
    class_names = {int(k): str(v) for k, v in table.items()}
    cells = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
    return LabelMap(width=width, height=height, cells=cells, class_names=class_names)


def write_label_map(map_path: str | Path, label_map: LabelMap) -> None:
    write_pgm(map_path, label_map.width, label_map.height, label_map.cells)
    sidecar_path(map_path).write_text(
        json.dumps({str(k): v for k, v in sorted(label_map.class_names.items())}, indent=0)
        + "\n",
        encoding="utf-8",
    )


def _canonical_key(class_label: str) -> tuple[int, str]:
    label = class_label.lower()
    try:
        return CANONICAL_PROMPT_ORDER.index(label), label
    except ValueError:
        return len(CANONICAL_PROMPT_ORDER), label


def coverage(
    label_map: LabelMap, presence_threshold: float = DEFAULT_PRESENCE_THRESHOLD
) -> SegmentationSummary:
    """Count per-side coverage for every class in the map.

    Road contributes only the whole-frame ``road_global_fraction``; all
    other classes get exact per-half fractions and presence flags.
    """
    w, h = label_map.width, label_map.height
    if w < 2:
        raise DegenerateFrameError(f"frame width {w} cannot be split into halves")
    half = w // 2
    left_counts = np.bincount(label_map.cells[:, :half].ravel(), minlength=256)
    right_counts = np.bincount(label_map.cells[:, half:].ravel(), minlength=256)
    left_area, right_area = half * h, (w - half) * h

    threshold = Fraction(presence_threshold).limit_denominator(10**9)
    road_pixels = 0
    stats = []
    for class_id, name in sorted(label_map.class_names.items()):
        lc = int(left_counts[class_id])
        rc = int(right_counts[class_id])
        if name.lower() == "road":
            road_pixels += lc + rc
            continue
        if lc == 0 and rc == 0:
            continue
        lf = Fraction(lc, left_area)
        rf = Fraction(rc, right_area)
        stats.append(
            SegClassStat(
                class_label=name,
                left_fraction=lf,
                right_fraction=rf,
                present_left=lf >= threshold,
                present_right=rf >= threshold,
            )
        )
    stats.sort(key=lambda s: _canonical_key(s.class_label))
    return SegmentationSummary(
        road_global_fraction=Fraction(road_pixels, w * h), stats=tuple(stats)
    )


def display_name(class_label: str) -> str:
    label = class_label.lower()
    return _DISPLAY_NAMES.get(label, label.capitalize())


def _pct(fraction) -> str:
    return f"{float(fraction) * 100:.2f}%"


def _sidewalk_side(present: bool, fraction) -> str:
    return f"True ({_pct(fraction)})" if present else "False"


def summarize_for_prompt(summary: SegmentationSummary) -> list[tuple[str, str]]:
    """Ordered, filtered (display name, rendered value) rows for a prompt.

    Road and Sidewalk always appear; any other class appears only when it
    covers at least one pixel on either side. Row order is the canonical
    prompt order, then alphabetical.
    """
    rows = [("Road (global)", _pct(summary.road_global_fraction))]
    sidewalk = summary.stat_for("sidewalk") or SegClassStat("sidewalk", 0.0, 0.0, False, False)
    rows.append(
        (
            "Sidewalk",
            f"Left = {_sidewalk_side(sidewalk.present_left, sidewalk.left_fraction)}; "
            f"Right = {_sidewalk_side(sidewalk.present_right, sidewalk.right_fraction)}",
        )
    )
    rest = [
        stat
        for stat in summary.stats
        if stat.class_label.lower() not in ("road", "sidewalk")
        and (stat.left_fraction > 0 or stat.right_fraction > 0)
    ]
    rest.sort(key=lambda s: _canonical_key(s.class_label))
    for stat in rest:
        rows.append(
            (
                display_name(stat.class_label),
                f"Left = {_pct(stat.left_fraction)}; Right = {_pct(stat.right_fraction)}",
            )
        )
    return rows
