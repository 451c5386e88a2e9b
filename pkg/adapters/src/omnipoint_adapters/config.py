"""Adapter configuration: backend model identities and confidence thresholds."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import InvalidConfig, MissingInput


@dataclass(frozen=True)
class AdapterConfig:
    """Which detector backends to run and how to filter their output.

    The `*_model` strings are version identifiers recorded into every
    emitted fixture's metadata. For the marker backend the "weights" are
    the rendering palette; `palette_path` points at it explicitly, or the
    adapters look for `palette.json` next to (then above) the input.
    """

    person_model: str = "marker-person-v1"
    pose_model: str = "marker-pose-v1"
    object_model: str = "marker-objects-v1"
    palette_path: Optional[str] = None
    person_threshold: float = 0.5
    keypoint_threshold: float = 0.25
    object_threshold: float = 0.2
    min_blob_px: int = 4

    def __post_init__(self):
        for name in ("person_threshold", "keypoint_threshold", "object_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {value!r}")
        if self.min_blob_px < 1:
            raise InvalidConfig(f"min_blob_px must be >= 1, got {self.min_blob_px!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "AdapterConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidConfig(f"bad config value: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "AdapterConfig":
        try:
            with open(Path(path), "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError as exc:
            raise MissingInput(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config file is not valid JSON: {path} ({exc})") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
