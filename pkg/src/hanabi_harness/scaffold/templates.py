"""Loader for the prompt text assets shipped under ``hanabi_harness/templates``."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import Template

TEMPLATE_VERSION = "1"


@lru_cache(maxsize=None)
def load(name: str) -> str:
    text = resources.files("hanabi_harness").joinpath("templates", f"{name}.txt").read_text("utf-8")
    return text.rstrip("\n")


def fill(name: str, **values) -> str:
    """Substitute ``${placeholder}`` fields; a missing value is an error."""
    return Template(load(name)).substitute(**values)
