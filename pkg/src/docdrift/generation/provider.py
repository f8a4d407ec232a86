"""Text-generation providers: remote HTTP, scripted replay, and caching.

The remote provider speaks a chat-completion-style protocol: one POST to a
configured URL with model, temperature, and a message list; the generated
text comes back under ``choices[0].message.content``. Scripted providers
replay canned responses, either keyed by an exact SHA-256 of the prompt or
consumed in playbook order; they are supported configurations in their own
right, and every hermetic fixture relies on one.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Iterable, Protocol

import httpx

from ..errors import ProviderError
from .types import ProviderParams


class Provider(Protocol):
    def generate(self, prompt: str, params: ProviderParams) -> str:
        """Return generated text for ``prompt``; raise ProviderError on failure."""
        ...


def prompt_key(prompt: str) -> str:
    """Exact-match key for scripted responses: SHA-256 of the prompt text."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class HttpProvider:
    """Remote chat-completion-style endpoint with bearer auth and retries.

    Retries transport failures, 429, and 5xx responses with a short backoff;
    anything else surfaces as ProviderError.
    """

    def __init__(
        self,
        base_url: str,
        *,
        auth_env_var: str | None = None,
        timeout: float = 120.0,
        max_retries: int = 3,
        backoff_seconds: float = 2.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url
        self.auth_env_var = auth_env_var
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env_var:
            token = os.environ.get(self.auth_env_var, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, prompt: str, params: ProviderParams) -> str:
        body = {
            "model": params.model,
            "temperature": params.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * attempt)
            try:
                response = self._client.post(self.base_url, json=body, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = ProviderError(
                    f"provider returned HTTP {response.status_code}: {response.text[:200]}"
                )
                continue
            if response.status_code != 200:
                raise ProviderError(
                    f"provider returned HTTP {response.status_code}: {response.text[:200]}"
                )
            return self._extract_text(response)
        raise ProviderError(f"provider unreachable after {self.max_retries + 1} attempts: {last_error}")

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc


class ScriptedProvider:
    """Deterministic stand-in for a model.

    Two lookup modes:

    * playbook: responses are consumed strictly in order (a directory of
      files replayed in sorted filename order, or an in-memory sequence);
    * hash: a directory of ``<sha256-of-prompt>.txt`` files, exact match.
    """

    def __init__(
        self,
        responses: Iterable[str] | None = None,
        *,
        hash_dir: Path | None = None,
    ):
        if (responses is None) == (hash_dir is None):
            raise ValueError("provide exactly one of responses or hash_dir")
        self._responses = list(responses) if responses is not None else None
        self._cursor = 0
        self._hash_dir = Path(hash_dir) if hash_dir is not None else None
        self._lock = threading.Lock()

    @classmethod
    def from_playbook_dir(cls, directory: Path) -> "ScriptedProvider":
        directory = Path(directory)
        if not directory.is_dir():
            raise ProviderError(f"playbook directory {directory} does not exist")
        files = sorted(p for p in directory.iterdir() if p.is_file())
        return cls([p.read_text(encoding="utf-8") for p in files])

    @classmethod
    def from_hash_dir(cls, directory: Path) -> "ScriptedProvider":
        directory = Path(directory)
        if not directory.is_dir():
            raise ProviderError(f"scripted response directory {directory} does not exist")
        return cls(hash_dir=directory)

    def generate(self, prompt: str, params: ProviderParams) -> str:
        if self._responses is not None:
            with self._lock:
                if self._cursor >= len(self._responses):
                    raise ProviderError(
                        f"scripted playbook exhausted after {len(self._responses)} responses"
                    )
                response = self._responses[self._cursor]
                self._cursor += 1
            return response
        assert self._hash_dir is not None
        path = self._hash_dir / f"{prompt_key(prompt)}.txt"
        if not path.is_file():
            raise ProviderError(f"no scripted response for prompt hash {prompt_key(prompt)[:12]}…")
        return path.read_text(encoding="utf-8")


def write_scripted_response(directory: Path, prompt: str, response: str) -> Path:
    """Author a hash-keyed scripted response file for ``prompt``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{prompt_key(prompt)}.txt"
    path.write_text(response, encoding="utf-8")
    return path


class CountingProvider:
    """Wrapper that counts pass-through calls; used to prove cache warmth."""

    def __init__(self, inner: Provider):
        self.inner = inner
        self.calls = 0
        self._lock = threading.Lock()

    def generate(self, prompt: str, params: ProviderParams) -> str:
        with self._lock:
            self.calls += 1
        return self.inner.generate(prompt, params)
