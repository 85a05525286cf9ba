"""Minimal chat-completions client for remote policies and teachers.

Every request is sent with temperature 0: trajectory synthesis and judging
must be reproducible, so sampling temperature is not configurable anywhere.
Transient failures (connection errors, 429, 5xx) are retried a bounded
number of times with exponential backoff before :class:`RemoteUnavailable`
is raised; other HTTP errors fail immediately.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import httpx


class RemoteUnavailable(RuntimeError):
    """The endpoint kept failing after all retry attempts."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass
class ChatClient:
    """Blocking JSON client for a chat-completions endpoint.

    ``base_url`` should point at the server root; requests go to
    ``{base_url}/v1/chat/completions``. ``retry_base_delay`` exists so tests
    can retry without waiting.
    """

    base_url: str
    model: str = "base-agent"
    timeout: float = 30.0
    max_attempts: int = 3
    retry_base_delay: float = 0.5
    api_key: str | None = None
    _client: httpx.Client = field(init=False, repr=False)

    def __post_init__(self):
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        self._client = httpx.Client(
            base_url=self.base_url, timeout=self.timeout, headers=headers
        )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ChatClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def complete(self, messages: Sequence[ChatMessage], max_tokens: int = 512) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": 0,
            "max_tokens": max_tokens,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.retry_base_delay * (2 ** (attempt - 1)))
            try:
                resp = self._client.post("/v1/chat/completions", json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = RuntimeError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            if resp.status_code != 200:
                raise RemoteUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise RemoteUnavailable(f"malformed completion payload: {exc}") from exc
        raise RemoteUnavailable(
            f"endpoint failed after {self.max_attempts} attempts: {last_error}"
        )
