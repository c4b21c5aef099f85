"""Loaders for the data files shipped inside the package: the default
rubric, the Windows seed knowledge base, the two environment profiles,
and the timeline source-type mapping."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .context import EnvironmentProfile, load_profile
from .knowledge_base import KnowledgeBase, load_kb
from .rubric import Rubric, load_rubric

_DATA = resources.files("tamperscore") / "data"

DEFAULT_RUBRIC_RESOURCE = "rubric/default.json"
DEFAULT_KB_RESOURCE = "kb/windows-default.json"
DEFAULT_MAPPING_RESOURCE = "mappings/default.json"
PROFILE_RESOURCES = ("profiles/home-admin.json", "profiles/corporate-standard-user.json")


def read_data(relative: str) -> bytes:
    return (_DATA / relative).read_bytes()


def default_rubric() -> Rubric:
    return load_rubric(read_data(DEFAULT_RUBRIC_RESOURCE))


def default_kb(rubric: Rubric | None = None) -> KnowledgeBase:
    return load_kb(read_data(DEFAULT_KB_RESOURCE), rubric or default_rubric())


def default_mapping() -> dict[str, str]:
    return json.loads(read_data(DEFAULT_MAPPING_RESOURCE).decode("utf-8"))


def shipped_profiles() -> dict[str, EnvironmentProfile]:
    profiles = {}
    for relative in PROFILE_RESOURCES:
        name = Path(relative).stem
        profiles[name] = load_profile(read_data(relative))
    return profiles
