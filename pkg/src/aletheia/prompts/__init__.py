"""Prompt templates, loaded from the package or an override directory.

Templates use ``str.format`` fields; an override directory only needs to
contain the files it replaces.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

NAMES = (
    "interpret",
    "interpret_rules",
    "interpret_image_rules",
    "summarize",
    "summarize_format",
    "init",
    "upload",
    "verify",
    "output_format",
    "no_evidence",
    "direct",
    "format_reminder",
)


@lru_cache(maxsize=None)
def _builtin(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


class PromptLibrary:
    def __init__(self, template_dir: str | Path | None = None):
        self.template_dir = Path(template_dir) if template_dir else None

    def raw(self, name: str) -> str:
        if name not in NAMES:
            raise KeyError(f"unknown prompt template {name!r}")
        if self.template_dir is not None:
            override = self.template_dir / f"{name}.txt"
            if override.is_file():
                return override.read_text(encoding="utf-8")
        return _builtin(name)

    def render(self, name: str, **fields) -> str:
        return self.raw(name).format(**fields).strip()


DEFAULT_PROMPTS = PromptLibrary()
