"""Reverse geocoding against a pluggable HTTP endpoint.

Coordinates round to 5 decimals (~1.1 m) for cache keys, which keeps GPS
jitter from blowing up the cache. The cache persists as a line-delimited
``key<TAB>address`` file; fixture mode treats that same file as its
complete, offline lookup table and never touches the network.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .model import GeoFix

MODES = ("online", "fixture")

RETRY_BACKOFF_S = (0.25, 1.0)


class GeocodeError(Exception):
    pass


class FixtureMissError(GeocodeError):
    """Coordinate absent from the fixture table in fixture mode."""


class GeocodeNetworkError(GeocodeError):
    """Request still failing after retries."""


class ResponseShapeError(GeocodeError):
    """Response did not contain the configured field path."""


@dataclass(frozen=True)
class GeocodeConfig:
    url_template: str = ""
    response_field_path: str = "display_name"
    rate_limit_per_s: float = 1.0
    cache_path: str | Path | None = None
    mode: str = "fixture"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise GeocodeError(f"unknown geocode mode {self.mode!r}")
        if self.rate_limit_per_s <= 0:
            raise GeocodeError("rate_limit_per_s must be positive")
        if self.mode == "online" and not (
            "{lat}" in self.url_template and "{lon}" in self.url_template
        ):
            raise GeocodeError("url_template must contain {lat} and {lon} placeholders")


def cache_key(lat: float, lon: float) -> str:
    return f"{lat:.5f},{lon:.5f}"


def walk_field_path(tree, dotted_path: str):
    """Follow a dotted path through nested dicts/lists ("address.road",
    "results.0.formatted")."""
    node = tree
    for part in dotted_path.split("."):
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise ResponseShapeError(f"no list index {part!r} in response") from None
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise ResponseShapeError(f"field path {dotted_path!r} missing at {part!r}")
    if not isinstance(node, str):
        raise ResponseShapeError(f"field path {dotted_path!r} is not a string")
    return node


class RateLimiter:
    """Allows at most ``rate_per_s`` acquisitions in any sliding 1 s window."""

    def __init__(
        self,
        rate_per_s: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self._limit = max(1, int(rate_per_s))
        self._clock = clock
        self._sleep = sleep
        self._recent: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            while self._recent and now - self._recent[0] >= 1.0:
                self._recent.popleft()
            if len(self._recent) >= self._limit:
                wait = 1.0 - (now - self._recent[0])
                if wait > 0:
                    self._sleep(wait)
                now = self._clock()
                while self._recent and now - self._recent[0] >= 1.0:
                    self._recent.popleft()
            self._recent.append(now)


def _default_transport(url: str, timeout_s: float):
    import requests

    resp = requests.get(url, timeout=timeout_s, headers={"User-Agent": "scenealert/0.1"})
    if resp.status_code != 200:
        raise ConnectionError(f"HTTP {resp.status_code}")
    return resp.json()


class ReverseGeocoder:
    """Cache-first reverse geocoder; concurrent reads, serialized writes."""

    def __init__(
        self,
        config: GeocodeConfig,
        transport: Callable[[str, float], dict] | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        timeout_s: float = 10.0,
    ):
        self.config = config
        self.network_calls = 0
        self._transport = transport or _default_transport
        self._sleep = sleep
        self._timeout_s = timeout_s
        self._limiter = RateLimiter(config.rate_limit_per_s, clock=clock, sleep=sleep)
        self._write_lock = threading.Lock()
        self._cache: dict[str, str] = {}
        if config.cache_path and Path(config.cache_path).exists():
            for line in Path(config.cache_path).read_text(encoding="utf-8").splitlines():
                if "\t" in line:
                    key, _, address = line.partition("\t")
                    self._cache[key] = address

    def reverse(self, fix: GeoFix) -> str:
        if not (-90.0 <= fix.lat <= 90.0 and -180.0 <= fix.lon <= 180.0):
            raise GeocodeError(f"coordinates out of bounds: {fix.lat}, {fix.lon}")
        key = cache_key(fix.lat, fix.lon)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self.config.mode == "fixture":
            raise FixtureMissError(f"no fixture entry for {key}")
        address = self._fetch(fix)
        self._store(key, address)
        return address

    def _fetch(self, fix: GeoFix) -> str:
        url = self.config.url_template.format(lat=fix.lat, lon=fix.lon)
        last_error: Exception | None = None
        for attempt in range(len(RETRY_BACKOFF_S) + 1):
            if attempt > 0:
                self._sleep(RETRY_BACKOFF_S[attempt - 1])
            self._limiter.acquire()
            self.network_calls += 1
            try:
                tree = self._transport(url, self._timeout_s)
            except (ConnectionError, TimeoutError, OSError) as exc:
                last_error = exc
                continue
            return walk_field_path(tree, self.config.response_field_path)
        raise GeocodeNetworkError(f"reverse geocoding failed after retries: {last_error}")

    def _store(self, key: str, address: str) -> None:
        with self._write_lock:
            self._cache[key] = address
            if self.config.cache_path:
                with open(self.config.cache_path, "a", encoding="utf-8") as fh:
                    fh.write(f"{key}\t{address}\n")


def reverse(fix: GeoFix, config: GeocodeConfig, **kwargs) -> str:
    """One-shot convenience wrapper around ReverseGeocoder."""
    return ReverseGeocoder(config, **kwargs).reverse(fix)
