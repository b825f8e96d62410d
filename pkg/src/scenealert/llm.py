"""Back-end dispatch: send prompts (and optionally images) to configured
LLM endpoints, measure latency, and normalize responses into alerts.

The wire shape is a chat-style HTTP POST with a single user message;
multimodal image content rides as a base64 data URL. Mock back ends stay
fully offline: they sleep their configured delay, read the scene facts
straight out of the structured prompt, and apply a fixed risk rule set,
so every downstream stage can run deterministically without accounts.
"""

from __future__ import annotations

import base64
import concurrent.futures
import os
import re
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .model import Alert
from .promptgen import PromptText

BACKEND_KINDS = ("text_only", "multimodal", "mock")
MODALITIES = ("text_only", "multimodal")

DEFAULT_RISK_KEYWORDS = ("warning", "caution", "alert", "brake", "danger", "slow down")

RETRY_BACKOFF_S = (0.25, 1.0)

# Classes the mock treats as occupied vehicles for its proximity rule.
VEHICLE_CLASSES = frozenset({"car", "bus", "truck", "motorcycle"})

_OBJECT_LINE = re.compile(
    r"^(?P<label>.+) \(conf (?P<conf>[0-9.]+)\) \| dist: (?P<dist>[0-9.]+) m; region: (?P<region>left|right)$",
    re.MULTILINE,
)
_SIDEWALK_LINE = re.compile(
    r"^Sidewalk Left = (?P<left>True|False)[^;]*; Right = (?P<right>True|False)", re.MULTILINE
)


class DispatchError(Exception):
    def __init__(self, backend_id: str, message: str):
        super().__init__(f"[{backend_id}] {message}")
        self.backend_id = backend_id


class ContractViolation(DispatchError):
    """Image handed to a back end that cannot accept one."""


class AuthError(DispatchError):
    pass


class TimeoutDispatchError(DispatchError):
    pass


class HttpDispatchError(DispatchError):
    pass


class ResponseFormatError(DispatchError):
    pass


class AllBackendsFailed(Exception):
    def __init__(self, failures: list["DispatchFailure"]):
        super().__init__("; ".join(f.message for f in failures))
        self.failures = failures


@dataclass(frozen=True)
class BackendConfig:
    """One configured back end. Mock fields apply only to kind="mock"."""

    backend_id: str
    kind: str
    endpoint_url: str = ""
    model_name: str = ""
    auth_env_var: str = ""
    timeout_ms: float = 30_000.0
    max_retries: int = 2
    mock_delay_ms: float | None = None
    mock_seed: int | None = None
    mock_modality: str = "text_only"
    response_text_path: str = "choices.0.message.content"

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"{self.backend_id}: unknown backend kind {self.kind!r}")
        if self.mock_modality not in MODALITIES:
            raise ValueError(f"{self.backend_id}: unknown mock_modality {self.mock_modality!r}")
        if self.kind != "mock" and (
            self.mock_delay_ms is not None
            or self.mock_seed is not None
            or self.mock_modality != "text_only"
        ):
            raise ValueError(f"{self.backend_id}: mock_* fields are only valid for mock back ends")

    @property
    def effective_kind(self) -> str:
        """Modality used for grouping and image routing."""
        return self.mock_modality if self.kind == "mock" else self.kind

    @property
    def accepts_image(self) -> bool:
        return self.effective_kind == "multimodal"


@dataclass(frozen=True)
class DispatchFailure:
    backend_id: str
    message: str


@dataclass(frozen=True)
class SceneObject:
    class_label: str
    confidence: float
    distance_m: float
    region: str


@dataclass(frozen=True)
class SceneFacts:
    objects: tuple[SceneObject, ...]
    sidewalk_left: bool
    sidewalk_right: bool

    def sidewalk_on(self, region: str) -> bool:
        return self.sidewalk_left if region == "left" else self.sidewalk_right


def parse_scene_facts(prompt_text: str) -> SceneFacts:
    """Recover the object list and sidewalk flags from a rendered prompt."""
    objects = tuple(
        SceneObject(
            class_label=m.group("label"),
            confidence=float(m.group("conf")),
            distance_m=float(m.group("dist")),
            region=m.group("region"),
        )
        for m in _OBJECT_LINE.finditer(prompt_text)
    )
    sidewalk = _SIDEWALK_LINE.search(prompt_text)
    return SceneFacts(
        objects=objects,
        sidewalk_left=bool(sidewalk and sidewalk.group("left") == "True"),
        sidewalk_right=bool(sidewalk and sidewalk.group("right") == "True"),
    )


def _mention(label: str) -> str:
    return "pedestrian" if label == "person" else label


def mock_generate(facts: SceneFacts, seed: int = 0) -> tuple[str, bool]:
    """Deterministic stand-in for a hosted model.

    Risk fires iff any person is closer than 10 m, any vehicle closer
    than 5 m, or persons share a side with no sidewalk. The alert text
    names the nearest risk object with its distance and side, and lists
    every detected class so downstream entity scoring sees the whole
    scene. Non-risk scenes get exactly "No hazards detected.".
    """
    risky = []
    for obj in facts.objects:
        person_close = obj.class_label == "person" and obj.distance_m < 10.0
        vehicle_close = obj.class_label in VEHICLE_CLASSES and obj.distance_m < 5.0
        person_exposed = obj.class_label == "person" and not facts.sidewalk_on(obj.region)
        if person_close or vehicle_close or person_exposed:
            risky.append(obj)
    if not risky:
        return "No hazards detected.", False
    nearest = min(risky, key=lambda o: o.distance_m)
    opener = ("Warning", "Caution", "Alert")[seed % 3]
    clauses = [
        f"{opener}: {_mention(nearest.class_label)} at {nearest.distance_m:.2f} m "
        f"on the {nearest.region} side."
    ]
    if any(o.class_label == "person" and not facts.sidewalk_on(o.region) for o in facts.objects):
        exposed_sides = sorted(
            {o.region for o in facts.objects if o.class_label == "person" and not facts.sidewalk_on(o.region)}
        )
        clauses.append(f"No sidewalk on the {' or '.join(exposed_sides)} side.")
    clauses.append("Slow down and cover the brake.")
    classes = sorted({_mention(o.class_label) for o in facts.objects})
    clauses.append(f"Detected: {', '.join(classes)}.")
    return " ".join(clauses), True


def classify_risk(alert_text: str, keywords: Iterable[str] = DEFAULT_RISK_KEYWORDS) -> bool:
    """True iff any keyword appears as a whole word (case-insensitive)."""
    for keyword in keywords:
        if re.search(rf"\b{re.escape(keyword)}\b", alert_text, re.IGNORECASE):
            return True
    return False


def _default_transport(url: str, headers: dict, payload: dict, timeout_s: float):
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout_s)
    except requests.Timeout as exc:
        raise TimeoutError(str(exc)) from exc
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    try:
        body = resp.json()
    except ValueError:
        body = None
    return resp.status_code, body


def _walk(tree, dotted_path: str):
    node = tree
    for part in dotted_path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node[part]
        else:
            raise KeyError(part)
    return node


def _build_payload(prompt: PromptText, image: bytes | None, backend: BackendConfig) -> dict:
    if image is None:
        content = prompt.full_text
    else:
        b64 = base64.b64encode(image).decode("ascii")
        content = [
            {"type": "text", "text": prompt.full_text},
            {"type": "image_url", "image_url": {"url": f"data:image/jpeg;base64,{b64}"}},
        ]
    return {"model": backend.model_name, "messages": [{"role": "user", "content": content}]}


def _dispatch_mock(
    prompt: PromptText,
    backend: BackendConfig,
    sleep: Callable[[float], None],
    keywords: Iterable[str],
) -> Alert:
    start = time.perf_counter()
    delay_ms = backend.mock_delay_ms or 0.0
    if backend.timeout_ms < delay_ms:
        sleep(backend.timeout_ms / 1000.0)
        raise TimeoutDispatchError(
            backend.backend_id, f"mock delay {delay_ms} ms exceeds timeout {backend.timeout_ms} ms"
        )
    sleep(delay_ms / 1000.0)
    text, _risk = mock_generate(parse_scene_facts(prompt.full_text), backend.mock_seed or 0)
    return Alert(
        backend_id=backend.backend_id,
        text=text,
        risk_flag=classify_risk(text, keywords),
        latency_ms=(time.perf_counter() - start) * 1000.0,
    )


def _dispatch_http(
    prompt: PromptText,
    image: bytes | None,
    backend: BackendConfig,
    transport,
    sleep: Callable[[float], None],
    keywords: Iterable[str],
) -> Alert:
    if backend.auth_env_var:
        token = os.environ.get(backend.auth_env_var)
        if not token:
            raise AuthError(backend.backend_id, f"auth variable {backend.auth_env_var} is not set")
        headers = {"Authorization": f"Bearer {token}"}
    else:
        headers = {}
    payload = _build_payload(prompt, image, backend)
    start = time.perf_counter()
    last_error = "no attempt made"
    for attempt in range(backend.max_retries + 1):
        if attempt > 0:
            sleep(RETRY_BACKOFF_S[min(attempt - 1, len(RETRY_BACKOFF_S) - 1)])
        try:
            status, body = transport(
                backend.endpoint_url, headers, payload, backend.timeout_ms / 1000.0
            )
        except TimeoutError as exc:
            last_error = f"timeout: {exc}"
            continue
        except (ConnectionError, OSError) as exc:
            last_error = f"network error: {exc}"
            continue
        if status >= 500:
            last_error = f"HTTP {status}"
            continue
        if status != 200:
            raise HttpDispatchError(backend.backend_id, f"HTTP {status}")
        try:
            text = _walk(body, backend.response_text_path)
        except (KeyError, IndexError, ValueError, TypeError):
            raise ResponseFormatError(
                backend.backend_id,
                f"response lacks field path {backend.response_text_path!r}",
            ) from None
        if not isinstance(text, str) or not text:
            raise ResponseFormatError(backend.backend_id, "response text empty or not a string")
        return Alert(
            backend_id=backend.backend_id,
            text=text,
            risk_flag=classify_risk(text, keywords),
            latency_ms=(time.perf_counter() - start) * 1000.0,
        )
    if last_error.startswith("timeout"):
        raise TimeoutDispatchError(backend.backend_id, last_error)
    raise HttpDispatchError(backend.backend_id, f"failed after retries: {last_error}")


def dispatch(
    prompt: PromptText,
    image: bytes | None,
    backend: BackendConfig,
    transport=None,
    sleep: Callable[[float], None] = time.sleep,
    keywords: Iterable[str] = DEFAULT_RISK_KEYWORDS,
) -> Alert:
    """Send one prompt to one back end and normalize the response.

    Latency is wall-clock from request start to full response. Text-only
    back ends reject an image argument outright.
    """
    if image is not None and not backend.accepts_image:
        raise ContractViolation(
            backend.backend_id, f"{backend.effective_kind} back end cannot accept an image"
        )
    if backend.kind == "mock":
        return _dispatch_mock(prompt, backend, sleep, keywords)
    return _dispatch_http(prompt, image, backend, transport or _default_transport, sleep, keywords)


def fan_out(
    prompt: PromptText,
    image: bytes | None,
    backends: Sequence[BackendConfig],
    transport=None,
    keywords: Iterable[str] = DEFAULT_RISK_KEYWORDS,
) -> list[Alert | DispatchFailure]:
    """Invoke all back ends concurrently; results follow config order.

    The image is routed only to back ends that accept one. Per-backend
    errors come back in-place as DispatchFailure entries; the call raises
    AllBackendsFailed only when nothing succeeded.
    """
    if not backends:
        raise ValueError("fan_out needs at least one back end")
    results: list[Alert | DispatchFailure] = [None] * len(backends)  # type: ignore[list-item]
    with concurrent.futures.ThreadPoolExecutor(max_workers=len(backends)) as pool:
        futures = {
            pool.submit(
                dispatch,
                prompt,
                image if backend.accepts_image else None,
                backend,
                transport,
                keywords=keywords,
            ): i
            for i, backend in enumerate(backends)
        }
        for future in concurrent.futures.as_completed(futures):
            i = futures[future]
            try:
                results[i] = future.result()
            except Exception as exc:
                results[i] = DispatchFailure(backends[i].backend_id, str(exc))
    failures = [r for r in results if isinstance(r, DispatchFailure)]
    if len(failures) == len(backends):
        raise AllBackendsFailed(failures)
    return results
