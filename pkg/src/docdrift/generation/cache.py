"""On-disk response cache.

Keys are a cryptographic hash over (template version, prompt, model,
temperature), so a warm cache makes a whole generation pass reproducible
offline with zero provider calls. Writes are atomic renames: under a
concurrent race the losers simply reuse the winner's value.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .provider import Provider
from .types import ProviderParams


class ResponseCache:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(template_version: str, prompt: str, params: ProviderParams) -> str:
        material = json.dumps(
            {
                "template_version": template_version,
                "prompt": prompt,
                "model": params.model,
                "temperature": params.temperature,
            },
            sort_keys=True,
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.txt"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None

    def put(self, key: str, text: str) -> str:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp_name, path)
        finally:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
        return path.read_text(encoding="utf-8")


class CachingProvider:
    """Serve from the cache when possible; otherwise delegate and store."""

    def __init__(self, inner: Provider, cache: ResponseCache, template_version: str):
        self.inner = inner
        self.cache = cache
        self.template_version = template_version

    def generate(self, prompt: str, params: ProviderParams) -> str:
        key = ResponseCache.key(self.template_version, prompt, params)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        return self.cache.put(key, self.inner.generate(prompt, params))
