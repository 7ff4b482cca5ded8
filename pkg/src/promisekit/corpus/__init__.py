"""Bundled example scenarios and traces.

``python -m promisekit.corpus NAME`` prints the path of a bundled file,
so shell pipelines can do e.g. ``promise explore "$(python -m
promisekit.corpus jub.promise)"``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

FILES = ("jub.promise", "isp.promise", "laws.promise", "jub_trace.txt")


def corpus_path(name: str) -> Path:
    """Filesystem path of a bundled corpus file."""
    if name not in FILES:
        raise KeyError(f"no bundled file {name!r}; available: {', '.join(FILES)}")
    return Path(str(resources.files(__package__).joinpath(name)))


def corpus_text(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")
