"""Pipeline configuration."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidParams, MissingFixture

STEPPING_MODES = ("arc", "longitude")
AREA_UNITS = ("steradian", "pixel")
FREQ_SCOPES = ("corpus", "image")


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared across the pipeline stages.

    Angles are degrees here (converted at use sites); everything downstream
    of the config works in radians.
    """

    step_deg: float = 30.0
    fov_deg: float = 60.0
    view_size: int = 640
    num_views: int = 11
    dedup_iou: float = 0.5
    extended_deg: float = 150.0
    kp_min: float = 0.1
    gt_iou: float = 0.5
    stepping: str = "arc"
    area_unit: str = "steradian"
    freq_scope: str = "corpus"
    person_margin: float = 1.5
    person_fov_min_deg: float = 30.0
    person_fov_max_deg: float = 120.0

    def __post_init__(self):
        if not 0.0 < self.step_deg <= 180.0:
            raise ValueError("step_deg must be in (0, 180]")
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must be in (0, 180)")
        if self.view_size < 2:
            raise ValueError("view_size must be >= 2")
        if self.num_views < 1:
            raise ValueError("num_views must be >= 1")
        if not 0.0 < self.dedup_iou <= 1.0:
            raise ValueError("dedup_iou must be in (0, 1]")
        if not 0.0 <= self.extended_deg <= 180.0:
            raise ValueError("extended_deg must be in [0, 180]")
        if not 0.0 <= self.kp_min <= 1.0:
            raise ValueError("kp_min must be in [0, 1]")
        if not 0.0 < self.gt_iou <= 1.0:
            raise ValueError("gt_iou must be in (0, 1]")
        if self.stepping not in STEPPING_MODES:
            raise ValueError(f"stepping must be one of {STEPPING_MODES}")
        if self.area_unit not in AREA_UNITS:
            raise ValueError(f"area_unit must be one of {AREA_UNITS}")
        if self.freq_scope not in FREQ_SCOPES:
            raise ValueError(f"freq_scope must be one of {FREQ_SCOPES}")
        if self.person_margin <= 0.0:
            raise ValueError("person_margin must be > 0")
        if not 0.0 < self.person_fov_min_deg <= self.person_fov_max_deg < 180.0:
            raise ValueError("need 0 < person_fov_min_deg <= person_fov_max_deg < 180")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidParams(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise InvalidParams(f"bad config value: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            with open(Path(path), "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError as exc:
            raise MissingFixture(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"config file is not valid JSON: {path} ({exc})") from exc
        return cls.from_dict(doc)

    def replace(self, **kwargs) -> "PipelineConfig":
        return dataclasses.replace(self, **kwargs)
