"""Small filesystem helpers."""

from __future__ import annotations

import hashlib
import re
import shutil
from pathlib import Path


def fingerprint_tree(root: Path) -> str:
    """Byte-level fingerprint of every regular file under ``root``.

    Stable across runs and platforms: relative POSIX paths and contents are
    hashed in sorted order. Used to prove the subject was never mutated.
    """
    root = Path(root)
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = path.relative_to(root).as_posix()
        digest.update(rel.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(hashlib.sha256(path.read_bytes()).digest())
    return digest.hexdigest()


def copy_tree(src: Path, dst: Path, *, suffixes: tuple[str, ...] | None = None) -> None:
    """Copy ``src`` into ``dst`` (created if needed), optionally filtering by suffix."""
    dst.mkdir(parents=True, exist_ok=True)
    for path in sorted(p for p in Path(src).rglob("*") if p.is_file()):
        if path.name.startswith(".") or "__pycache__" in path.parts:
            continue
        if suffixes is not None and path.suffix not in suffixes:
            continue
        target = dst / path.relative_to(src)
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(path, target)


_SLUG_RE = re.compile(r"[^A-Za-z0-9._-]+")


def slugify(identifier: str) -> str:
    """Filesystem-safe directory name for a function id; collision-proofed
    with a short content hash."""
    short = hashlib.sha256(identifier.encode("utf-8")).hexdigest()[:8]
    cleaned = _SLUG_RE.sub("_", identifier).strip("_")[:80] or "fn"
    return f"{cleaned}-{short}"
