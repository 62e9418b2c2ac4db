"""Chat-completion backends with retries, a disk response cache, and a
deterministic mock.

The mock backend never calls the network: it replays the gloss trace
comment embedded in the prompt (first gloss per covered word, uncovered
tokens copied through, source returned verbatim at zero coverage), which
makes full-pipeline runs reproducible byte for byte.

The OpenAI-compatible backend posts a single-user-message chat completion
to a configured endpoint.  Transient failures (429, 408, 5xx, timeouts,
connection errors) retry with exponential backoff and jitter up to a
maximum attempt count; auth failures and other client errors are terminal.
Responses cache to one JSON file per (model, prompt) hash so reruns replay
identical text and latency without network traffic.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence
from urllib.parse import urlparse

import requests

from .prompting import TRACE_RE


class LlmError(Exception):
    """Base class for completion failures."""


class LlmConfigError(LlmError):
    """Backend misconfiguration detected before any request is sent."""


class LlmAuthError(LlmError):
    """401/403 from the endpoint; retrying cannot help."""


class LlmRequestError(LlmError):
    """Terminal request failure (malformed response, non-retryable 4xx)."""


class LlmTransientError(LlmError):
    """Retryable failures exhausted the attempt budget."""


@dataclass(frozen=True)
class LlmRequest:
    prompt: str
    model: str = "mock-gloss"
    max_tokens: int = 512
    temperature: float = 0.0
    stop: tuple[str, ...] = ()


@dataclass(frozen=True)
class LlmResponse:
    text: str
    model: str
    backend: str
    latency_ms: float = 0.0
    retries: int = 0
    cached: bool = False


def prompt_hash(model: str, prompt: str) -> str:
    return hashlib.sha256(f"{model}\n{prompt}".encode("utf-8")).hexdigest()


def mock_gloss_translate(prompt: str) -> str:
    """Decode the gloss trace marker and emit the word-by-word translation."""
    m = TRACE_RE.search(prompt)
    if m is None:
        raise LlmRequestError("prompt carries no gloss trace marker")
    try:
        payload = json.loads(m.group(1))
        join = payload["join"]
        src = payload["src"]
        tokens = [(str(s), g) for s, g in payload["tokens"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise LlmRequestError(f"unreadable gloss trace marker: {exc}") from exc
    if all(g is None for _, g in tokens):
        return src
    return join.join(g if g is not None else s for s, g in tokens)


class Backend(Protocol):
    name: str

    def complete(self, req: LlmRequest) -> LlmResponse: ...


class MockGlossBackend:
    """Offline backend that translates by replaying the prompt's gloss trace."""

    name = "mock"

    def complete(self, req: LlmRequest) -> LlmResponse:
        text = mock_gloss_translate(req.prompt)
        return LlmResponse(text=text, model=req.model, backend=self.name, latency_ms=0.0)


class OpenAiChatBackend:
    """POSTs chat completions to an OpenAI-compatible endpoint.

    The credential is read from the environment variable named by
    ``api_key_env`` at request time (never stored); the endpoint URL is
    validated at construction so misconfiguration fails before any request.
    """

    name = "openai-chat"

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "DICTMT_API_KEY",
        timeout: float = 60.0,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        jitter: float = 0.25,
        session: requests.Session | None = None,
    ) -> None:
        parsed = urlparse(endpoint)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise LlmConfigError(f"endpoint is not an http(s) URL: {endpoint!r}")
        if max_attempts < 1:
            raise LlmConfigError("max_attempts must be >= 1")
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.jitter = jitter
        self._session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, req: LlmRequest) -> LlmResponse:
        body: dict = {
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.stop:
            body["stop"] = list(req.stop)
        last_error = "no attempt made"
        for attempt in range(self.max_attempts):
            start = time.perf_counter()
            try:
                resp = self._session.post(
                    self.endpoint, json=body, headers=self._headers(), timeout=self.timeout
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code == 200:
                    latency = (time.perf_counter() - start) * 1000.0
                    return LlmResponse(
                        text=self._extract_text(resp),
                        model=req.model,
                        backend=self.name,
                        latency_ms=latency,
                        retries=attempt,
                    )
                if resp.status_code in (401, 403):
                    raise LlmAuthError(f"HTTP {resp.status_code} from {self.endpoint}")
                if resp.status_code in (408, 429) or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                else:
                    raise LlmRequestError(
                        f"HTTP {resp.status_code}: {resp.text[:200]}"
                    )
            if attempt + 1 < self.max_attempts:
                delay = self.backoff_base * (2**attempt)
                delay *= 1.0 + self.jitter * random.random()
                time.sleep(delay)
        raise LlmTransientError(
            f"gave up after {self.max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _extract_text(resp: requests.Response) -> str:
        try:
            data = resp.json()
            choice = data["choices"][0]
            if "message" in choice:
                return choice["message"]["content"]
            return choice["text"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise LlmRequestError(f"unreadable completion response: {exc}") from exc


class LlmClient:
    """Caching, parallel-dispatch wrapper over a backend.

    One JSON file per (model, prompt) hash; cache writes are serialized and
    atomic, and cache hits replay the stored text and latency.
    ``complete_many`` returns results in submission order, with per-request
    errors returned in place rather than raised.
    """

    def __init__(
        self,
        backend: Backend,
        cache_dir: str | Path | None = None,
        parallelism: int = 4,
    ) -> None:
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.backend = backend
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.parallelism = parallelism
        self._write_lock = threading.Lock()

    def _cache_path(self, key: str) -> Path | None:
        return self.cache_dir / f"{key}.json" if self.cache_dir else None

    def complete(self, req: LlmRequest) -> LlmResponse:
        key = prompt_hash(req.model, req.prompt)
        path = self._cache_path(key)
        if path and path.is_file():
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
            return LlmResponse(
                text=raw["text"],
                model=raw["model"],
                backend=raw["backend"],
                latency_ms=raw["latency_ms"],
                retries=0,
                cached=True,
            )
        resp = self.backend.complete(req)
        if path:
            payload = {
                "prompt_sha256": key,
                "model": resp.model,
                "backend": resp.backend,
                "text": resp.text,
                "latency_ms": resp.latency_ms,
            }
            with self._write_lock:
                tmp = path.with_suffix(".tmp")
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh, ensure_ascii=False)
                os.replace(tmp, path)
        return resp

    def complete_many(
        self, reqs: Sequence[LlmRequest]
    ) -> list[LlmResponse | LlmError]:
        def safe(req: LlmRequest) -> LlmResponse | LlmError:
            try:
                return self.complete(req)
            except LlmError as exc:
                return exc

        if not reqs:
            return []
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            futures = [pool.submit(safe, r) for r in reqs]
            return [f.result() for f in futures]
