"""Prompt templates, loaded from versioned text assets.

Every template change must bump TEMPLATE_VERSION: the version participates in
response-cache keys and is recorded in run reports, so stale cache entries can
never masquerade as fresh generations.
"""

from __future__ import annotations

from importlib import resources

TEMPLATE_VERSION = "tpl-1"

_TEMPLATE_NAMES = ("behaviors", "completion", "repair", "synthesis")


def _load(name: str) -> str:
    return (
        resources.files(__package__).joinpath("templates").joinpath(f"{name}.txt").read_text("utf-8")
    )


_TEMPLATES: dict[str, str] = {name: _load(name) for name in _TEMPLATE_NAMES}


def render_template(name: str, **fields: str) -> str:
    if name not in _TEMPLATES:
        raise KeyError(f"unknown prompt template {name!r}")
    return _TEMPLATES[name].format(**fields)
