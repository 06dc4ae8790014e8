"""Chat-completion backends: live HTTP, deterministic mock, and replay.

The live backend speaks the OpenAI-compatible chat-completions shape
(POST {model, temperature, messages}) with bearer auth, retrying transient
failures with doubling full-jitter backoff. Mock and replay make the whole
pipeline runnable offline: mock derives its answer from a hash of the
prompt, replay serves recorded transcripts keyed by the same hash.

The API key is read from the environment at call time and never appears in
logs, errors, or transcripts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from gptutor.errors import (
    AuthError,
    BackendUnavailable,
    Cancelled,
    MalformedResponse,
    RateLimited,
    StoreUnwritable,
)
from gptutor.prompt import PromptBundle

logger = logging.getLogger(__name__)

BACKEND_LIVE = "live"
BACKEND_MOCK = "mock"
BACKEND_REPLAY = "replay"
BACKEND_NAMES = (BACKEND_LIVE, BACKEND_MOCK, BACKEND_REPLAY)

_SYSTEM_LANGUAGE_RE = re.compile(r"You are a helpful coding tutor master in ([a-z]+)\.")


@dataclass(frozen=True)
class LlmConfig:
    api_base: str = "https://api.openai.com/v1"
    api_key_source: str = "OPENAI_API_KEY"
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 2
    max_concurrent: int = 4

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


@dataclass(frozen=True)
class ExplanationResult:
    text: str
    model: str
    cached: bool
    latency_ms: int
    backend: str


class CancelToken:
    """Cooperative cancellation flag shared between caller and backend."""

    def __init__(self) -> None:
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()

    def wait(self, timeout: float | None = None) -> bool:
        return self._event.wait(timeout)


def prompt_sha256(prompt: PromptBundle) -> str:
    """Content hash of the two messages; keys mocks and transcripts."""
    payload = prompt.system_message + "\u0000" + prompt.user_message
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def parse_completion_response(body: bytes) -> str:
    """Extract choices[0].message.content from a chat-completions body."""
    try:
        data = json.loads(body)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedResponse(f"response body is not JSON: {exc}") from None
    choices = data.get("choices") if isinstance(data, dict) else None
    if not isinstance(choices, list) or not choices:
        raise MalformedResponse("response has no choices")
    message = choices[0].get("message") if isinstance(choices[0], dict) else None
    content = message.get("content") if isinstance(message, dict) else None
    if not isinstance(content, str) or content == "":
        raise MalformedResponse("response has no message content")
    return content


class TransportFailure(Exception):
    """Network-level failure (connect/timeout); retried as transient."""


#: transport(url, headers, payload, timeout) -> (status_code, body_bytes)
Transport = Callable[[str, dict[str, str], dict, float], tuple[int, bytes]]


def default_transport(url: str, headers: dict[str, str], payload: dict, timeout: float) -> tuple[int, bytes]:
    import httpx

    try:
        response = httpx.post(url, headers=headers, json=payload, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportFailure(type(exc).__name__) from None
    return response.status_code, response.content


# ---------------------------------------------------------------------------
# Transcript store (record/replay)
# ---------------------------------------------------------------------------


class TranscriptStore:
    """Append-only JSON-lines store of recorded answers, keyed by prompt hash."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def record(self, prompt: PromptBundle, result: ExplanationResult) -> None:
        entry = {
            "prompt_sha256": prompt_sha256(prompt),
            "model": result.model,
            "text": result.text,
            "recorded_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise StoreUnwritable(f"cannot append transcript: {exc}") from None

    def lookup(self, prompt: PromptBundle) -> dict | None:
        """Latest entry for the prompt hash, or None."""
        key = prompt_sha256(prompt)
        if not self.path.is_file():
            return None
        found: dict | None = None
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                except ValueError:
                    continue
                if entry.get("prompt_sha256") == key:
                    found = entry
        return found


def record_transcript(store: str | Path, prompt: PromptBundle, result: ExplanationResult) -> None:
    TranscriptStore(store).record(prompt, result)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


def mock_explanation(prompt: PromptBundle) -> str:
    m = _SYSTEM_LANGUAGE_RE.search(prompt.system_message)
    language = m.group(1) if m else "unknown"
    return f"MOCK-EXPLANATION {prompt_sha256(prompt)[:12]} {language}"


class MockBackend:
    name = BACKEND_MOCK

    def complete(self, prompt: PromptBundle, cancel: CancelToken | None = None) -> tuple[str, str]:
        return mock_explanation(prompt), prompt.model


class ReplayBackend:
    name = BACKEND_REPLAY

    def __init__(self, store: TranscriptStore | None):
        self._store = store

    def complete(self, prompt: PromptBundle, cancel: CancelToken | None = None) -> tuple[str, str]:
        if self._store is None:
            raise BackendUnavailable("no transcript store configured")
        entry = self._store.lookup(prompt)
        if entry is None:
            raise BackendUnavailable(
                f"no transcript for prompt {prompt_sha256(prompt)[:12]}"
            )
        return entry["text"], entry.get("model", prompt.model)


class LiveBackend:
    name = BACKEND_LIVE

    def __init__(
        self,
        config: LlmConfig,
        *,
        transport: Transport | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self._config = config
        self._transport = transport
        self._sleeper = sleeper
        self._rng = rng or random.Random()
        self._limiter = threading.Semaphore(config.max_concurrent)

    def _resolve_key(self) -> str:
        key = os.environ.get(self._config.api_key_source)
        if not key:
            raise AuthError(
                f"no API key found; set the {self._config.api_key_source} "
                "environment variable"
            )
        return key

    def _scrub(self, text: str, key: str) -> str:
        return text.replace(key, "***") if key else text

    def complete(self, prompt: PromptBundle, cancel: CancelToken | None = None) -> tuple[str, str]:
        key = self._resolve_key()
        transport = self._transport or default_transport
        url = self._config.api_base.rstrip("/") + "/chat/completions"
        headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }
        payload = {
            "model": prompt.model,
            "temperature": self._config.temperature,
            "messages": [
                {"role": "system", "content": prompt.system_message},
                {"role": "user", "content": prompt.user_message},
            ],
        }

        max_attempts = 1 + self._config.max_retries
        delay = 1.0
        with self._limiter:
            for attempt in range(1, max_attempts + 1):
                if cancel is not None and cancel.cancelled:
                    raise Cancelled("request cancelled before send")
                status: int | None = None
                failure: str | None = None
                try:
                    status, body = transport(url, headers, payload, self._config.timeout)
                except TransportFailure as exc:
                    failure = self._scrub(str(exc), key)
                if cancel is not None and cancel.cancelled:
                    raise Cancelled("request cancelled in flight")
                if failure is None:
                    assert status is not None
                    if status in (401, 403):
                        raise AuthError(
                            f"backend rejected credentials (HTTP {status}); check the "
                            f"{self._config.api_key_source} environment variable"
                        )
                    if status == 429:
                        failure = "rate limited (HTTP 429)"
                    elif 500 <= status < 600:
                        failure = f"backend error (HTTP {status})"
                    elif status != 200:
                        raise BackendUnavailable(f"backend rejected request (HTTP {status})")
                    else:
                        return parse_completion_response(body), prompt.model
                if attempt == max_attempts:
                    if status == 429:
                        raise RateLimited(f"still rate limited after {max_attempts} attempts")
                    raise BackendUnavailable(
                        f"backend unavailable after {max_attempts} attempts: {failure}"
                    )
                pause = self._rng.uniform(0.0, delay)
                logger.debug("retrying after %s (attempt %d): %s", pause, attempt, failure)
                self._sleeper(pause)
                delay *= 2

        raise AssertionError("unreachable")


class LlmGateway:
    """Routes prompts to a named backend and wraps results with metadata."""

    def __init__(
        self,
        config: LlmConfig,
        *,
        transport: Transport | None = None,
        transcript_path: str | Path | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self.config = config
        store = TranscriptStore(transcript_path) if transcript_path else None
        self.transcripts = store
        self.backends: dict[str, object] = {
            BACKEND_LIVE: LiveBackend(config, transport=transport, sleeper=sleeper, rng=rng),
            BACKEND_MOCK: MockBackend(),
            BACKEND_REPLAY: ReplayBackend(store),
        }

    def complete(
        self,
        prompt: PromptBundle,
        backend: str = BACKEND_LIVE,
        cancel: CancelToken | None = None,
    ) -> ExplanationResult:
        impl = self.backends.get(backend)
        if impl is None:
            raise ValueError(f"unknown backend: {backend}")
        if cancel is not None and cancel.cancelled:
            raise Cancelled("request cancelled")
        started = time.monotonic()
        text, model = impl.complete(prompt, cancel)  # type: ignore[attr-defined]
        if cancel is not None and cancel.cancelled:
            raise Cancelled("request cancelled")
        latency_ms = int((time.monotonic() - started) * 1000)
        return ExplanationResult(
            text=text, model=model, cached=False, latency_ms=latency_ms, backend=backend
        )


def complete(
    config: LlmConfig,
    prompt: PromptBundle,
    backend: str = BACKEND_LIVE,
    *,
    transcript_path: str | Path | None = None,
    cancel: CancelToken | None = None,
) -> ExplanationResult:
    """One-shot convenience wrapper around a fresh gateway."""
    gateway = LlmGateway(config, transcript_path=transcript_path)
    return gateway.complete(prompt, backend=backend, cancel=cancel)
