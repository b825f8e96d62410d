"""Decode raw CAN frames into telemetry via a declarative signal map.

The map covers exactly the signals the pipeline consumes (speed, brake,
steering); it is not a DBC parser. Signals are linear: value =
raw * scale + offset.

Bit addressing convention (documented contract, see the config
reference): little-endian signals use LSB0 counting, where bit 0 is the
least significant bit of byte 0; big-endian signals use MSB0 (Motorola)
counting, where bit 0 is the most significant bit of byte 0. A signal
occupies ``bit_length`` consecutive bits starting at ``start_bit`` in
its own numbering scheme.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

from .model import Diagnostic, Telemetry

BYTE_ORDERS = ("little_endian", "big_endian")

MAX_EXTENDED_ID = 0x1FFF_FFFF  # 29-bit

_LOG_LINE = re.compile(
    r"^\((?P<ts>\d+(?:\.\d+)?)\)\s+(?P<iface>\S+)\s+(?P<id>[0-9A-Fa-f]{1,8})#(?P<data>[0-9A-Fa-f]*)\s*$"
)


class CanError(Exception):
    """Base class for CAN decode/encode failures."""


class CanDecodeError(CanError):
    pass


class CanEncodeError(CanError):
    pass


class IncompleteTelemetryError(CanError):
    """A mapped signal never appeared in the frame set."""

    def __init__(self, missing: list[str]):
        super().__init__(f"no frames for signal(s): {', '.join(sorted(missing))}")
        self.missing = sorted(missing)


@dataclass(frozen=True)
class SignalSpec:
    """Placement and scaling of one signal within a CAN frame payload."""

    name: str
    frame_id: int
    start_bit: int
    bit_length: int
    byte_order: str = "little_endian"
    signed: bool = False
    scale: float = 1.0
    offset: float = 0.0
    unit: str = ""

    def __post_init__(self) -> None:
        if not (0 <= self.frame_id <= MAX_EXTENDED_ID):
            raise ValueError(f"{self.name}: frame_id out of 29-bit range ({self.frame_id:#x})")
        if self.byte_order not in BYTE_ORDERS:
            raise ValueError(f"{self.name}: unknown byte_order {self.byte_order!r}")
        if not (1 <= self.bit_length <= 64):
            raise ValueError(f"{self.name}: bit_length must be 1..64, got {self.bit_length}")
        if not (0 <= self.start_bit <= 63):
            raise ValueError(f"{self.name}: start_bit must be 0..63, got {self.start_bit}")
        if self.start_bit + self.bit_length > 64:
            raise ValueError(f"{self.name}: signal spans past bit 63")
        if self.scale == 0:
            raise ValueError(f"{self.name}: scale must be nonzero")

    @property
    def raw_range(self) -> tuple[int, int]:
        if self.signed:
            return -(1 << (self.bit_length - 1)), (1 << (self.bit_length - 1)) - 1
        return 0, (1 << self.bit_length) - 1


@dataclass(frozen=True)
class CanFrame:
    frame_id: int
    data: bytes
    timestamp_ms: float = 0.0

    @property
    def dlc(self) -> int:
        return len(self.data)


def decode_signal(frame: CanFrame, spec: SignalSpec) -> float:
    """Extract the physical value of ``spec`` from ``frame``."""
    if frame.frame_id != spec.frame_id:
        raise CanDecodeError(
            f"{spec.name}: frame id {frame.frame_id:#x} does not match spec id {spec.frame_id:#x}"
        )
    if spec.start_bit + spec.bit_length > frame.dlc * 8:
        raise CanDecodeError(
            f"{spec.name}: bits {spec.start_bit}..{spec.start_bit + spec.bit_length - 1} "
            f"exceed {frame.dlc}-byte payload"
        )
    padded = frame.data.ljust(8, b"\x00")
    mask = (1 << spec.bit_length) - 1
    if spec.byte_order == "little_endian":
        word = int.from_bytes(padded, "little")
        raw = (word >> spec.start_bit) & mask
    else:
        word = int.from_bytes(padded, "big")
        raw = (word >> (64 - spec.start_bit - spec.bit_length)) & mask
    if spec.signed and raw & (1 << (spec.bit_length - 1)):
        raw -= 1 << spec.bit_length
    return raw * spec.scale + spec.offset


def encode_signal(value: float, spec: SignalSpec) -> bytes:
    """Place ``value`` into a zeroed 8-byte payload (round-trip oracle).

    decode_signal(encode_signal(v)) recovers v to within one scale
    quantum. Raises CanEncodeError when (value - offset) / scale does not
    fit in ``bit_length`` bits.
    """
    raw = round((value - spec.offset) / spec.scale)
    lo, hi = spec.raw_range
    if not (lo <= raw <= hi):
        raise CanEncodeError(
            f"{spec.name}: value {value} maps to raw {raw}, outside [{lo}, {hi}]"
        )
    if raw < 0:
        raw += 1 << spec.bit_length
    if spec.byte_order == "little_endian":
        word = raw << spec.start_bit
        return word.to_bytes(8, "little")
    word = raw << (64 - spec.start_bit - spec.bit_length)
    return word.to_bytes(8, "big")


def parse_can_log(
    lines: Iterable[str] | IO[str],
) -> tuple[list[CanFrame], list[Diagnostic]]:
    """Parse candump-style text: ``(<ts>) <iface> <ID>#<HEXDATA>``.

    Malformed lines never abort the parse; they are collected as
    diagnostics carrying 1-based line numbers.
    """
    frames: list[CanFrame] = []
    diagnostics: list[Diagnostic] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        m = _LOG_LINE.match(stripped)
        if m is None:
            diagnostics.append(Diagnostic(line_no, f"unparseable CAN log line: {stripped[:80]!r}"))
            continue
        frame_id = int(m.group("id"), 16)
        if frame_id > MAX_EXTENDED_ID:
            diagnostics.append(Diagnostic(line_no, f"frame id {m.group('id')} exceeds 29 bits"))
            continue
        hexdata = m.group("data")
        if len(hexdata) % 2 != 0 or len(hexdata) > 16:
            diagnostics.append(Diagnostic(line_no, f"bad payload length ({len(hexdata)} hex chars)"))
            continue
        frames.append(
            CanFrame(
                frame_id=frame_id,
                data=bytes.fromhex(hexdata),
                timestamp_ms=float(m.group("ts")) * 1000.0,
            )
        )
    return frames, diagnostics


def _latest_values(
    frames: Iterable[CanFrame], signal_map: Mapping[str, SignalSpec]
) -> dict[str, float]:
    latest: dict[str, tuple[float, float]] = {}
    for frame in frames:
        for name, spec in signal_map.items():
            if frame.frame_id != spec.frame_id:
                continue
            if spec.start_bit + spec.bit_length > frame.dlc * 8:
                continue  # short frame for this signal; skip, do not fail
            value = decode_signal(frame, spec)
            seen = latest.get(name)
            if seen is None or frame.timestamp_ms >= seen[0]:
                latest[name] = (frame.timestamp_ms, value)
    return {name: value for name, (_ts, value) in latest.items()}


def decode_telemetry(
    frames: Iterable[CanFrame], signal_map: Mapping[str, SignalSpec]
) -> Telemetry:
    """Latest-by-timestamp speed/brake/steering from a frame set.

    ``signal_map`` must provide the keys "speed", "brake" and
    "steering". Brake is pressed iff its decoded value is nonzero.
    """
    required = ("speed", "brake", "steering")
    missing_specs = [name for name in required if name not in signal_map]
    if missing_specs:
        raise IncompleteTelemetryError(missing_specs)
    values = _latest_values(frames, {name: signal_map[name] for name in required})
    missing = [name for name in required if name not in values]
    if missing:
        raise IncompleteTelemetryError(missing)
    return Telemetry(
        speed_kmh=values["speed"],
        brake_pressed=values["brake"] != 0,
        steering_angle_deg=values["steering"],
    )


def telemetry_stream(
    frames: Iterable[CanFrame], signal_map: Mapping[str, SignalSpec]
) -> list[tuple[float, Telemetry]]:
    """Timestamped telemetry snapshots as the CAN state evolves.

    Emits one (timestamp_ms, Telemetry) pair at every frame that updates
    a mapped signal, once all three signals have been seen at least once.
    Frames must be in timestamp order for snapshots to be meaningful.
    """
    state: dict[str, float] = {}
    samples: list[tuple[float, Telemetry]] = []
    for frame in frames:
        updated = False
        for name in ("speed", "brake", "steering"):
            spec = signal_map.get(name)
            if spec is None or frame.frame_id != spec.frame_id:
                continue
            if spec.start_bit + spec.bit_length > frame.dlc * 8:
                continue
            state[name] = decode_signal(frame, spec)
            updated = True
        if updated and len(state) == 3:
            samples.append(
                (
                    frame.timestamp_ms,
                    Telemetry(
                        speed_kmh=state["speed"],
                        brake_pressed=state["brake"] != 0,
                        steering_angle_deg=state["steering"],
                    ),
                )
            )
    return samples
