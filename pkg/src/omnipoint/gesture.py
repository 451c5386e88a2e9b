"""Skeleton keypoints to a directed pointing circle on the sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from .config import PipelineConfig
from .errors import DegenerateCircle, MissingKeypoints, NoArmDetected
from .projection import EquirectGrid, ViewSpec, equirect_px_to_lonlat, gnomonic_inverse
from .sphere import (
    DEGENERATE_CROSS_NORM,
    DirectedPointing,
    LonLat,
    SphereDir,
    cross_components,
    great_circle_from_two,
    lonlat_to_dir,
)

ARMS = ("left", "right")

ARM_KEYPOINTS = {
    "left": ("l_shoulder", "l_elbow", "l_wrist", "l_fingertip"),
    "right": ("r_shoulder", "r_elbow", "r_wrist", "r_fingertip"),
}

KEYPOINT_NAMES = frozenset(
    ("head", "neck")
    + ARM_KEYPOINTS["left"]
    + ARM_KEYPOINTS["right"]
)

Frame = Union[ViewSpec, EquirectGrid]


@dataclass(frozen=True)
class Keypoint:
    u: float
    v: float
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence!r}")


@dataclass(frozen=True)
class Skeleton:
    """Named 2D keypoints plus the frame their pixel coordinates live in."""

    keypoints: Mapping[str, Keypoint]
    frame: Frame

    def __post_init__(self):
        if isinstance(self.frame, ViewSpec):
            w = h = float(self.frame.size)
        else:
            w, h = float(self.frame.width), float(self.frame.height)
        for name, kp in self.keypoints.items():
            if name not in KEYPOINT_NAMES:
                raise ValueError(f"unknown keypoint name {name!r}")
            if not (0.0 <= kp.u <= w and 0.0 <= kp.v <= h):
                raise ValueError(f"keypoint {name!r} at ({kp.u!r}, {kp.v!r}) outside its frame")


@dataclass(frozen=True)
class PersonBox:
    """Axis-aligned person box in equirect pixels."""

    u_min: float
    v_min: float
    u_max: float
    v_max: float
    confidence: float = 1.0

    def __post_init__(self):
        if self.u_max <= self.u_min or self.v_max <= self.v_min:
            raise ValueError("person box needs positive width and height")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("person box confidence must be in [0, 1]")


def user_lonlat_from_bbox(grid: EquirectGrid, box: PersonBox) -> LonLat:
    """Angular position of the person box center."""
    return equirect_px_to_lonlat(grid, (box.u_min + box.u_max) / 2.0, (box.v_min + box.v_max) / 2.0)


def person_view_spec(grid: EquirectGrid, box: PersonBox, cfg: PipelineConfig) -> ViewSpec:
    """Perspective view framing the person.

    The field of view is the box's larger angular extent scaled by the margin
    factor, clamped to the configured bounds.
    """
    lon_extent = (box.u_max - box.u_min) * 2.0 * math.pi / grid.width
    lat_extent = (box.v_max - box.v_min) * math.pi / grid.height
    fov = cfg.person_margin * max(lon_extent, lat_extent)
    fov = min(math.radians(cfg.person_fov_max_deg), max(math.radians(cfg.person_fov_min_deg), fov))
    center = user_lonlat_from_bbox(grid, box)
    max_lat = math.radians(89.9)
    lat = min(max_lat, max(-max_lat, center.lat))
    return ViewSpec(LonLat(center.lon, lat), fov, cfg.view_size)


def _valid_keypoint(s: Skeleton, name: str, kp_min: float) -> Keypoint | None:
    kp = s.keypoints.get(name)
    if kp is None or kp.confidence < kp_min:
        return None
    return kp


def _require_keypoint(s: Skeleton, name: str, kp_min: float) -> Keypoint:
    kp = _valid_keypoint(s, name, kp_min)
    if kp is None:
        raise MissingKeypoints(f"keypoint {name!r} missing or below confidence {kp_min}")
    return kp


def elbow_angle(s: Skeleton, arm: str, kp_min: float = 0.1) -> float:
    """Interior angle at the elbow in frame pixel coordinates, degrees in [0, 180]."""
    shoulder_name, elbow_name, wrist_name, _ = ARM_KEYPOINTS[arm]
    sh = _require_keypoint(s, shoulder_name, kp_min)
    el = _require_keypoint(s, elbow_name, kp_min)
    wr = _require_keypoint(s, wrist_name, kp_min)
    ax, ay = sh.u - el.u, sh.v - el.v
    bx, by = wr.u - el.u, wr.v - el.v
    na = math.hypot(ax, ay)
    nb = math.hypot(bx, by)
    if na == 0.0 or nb == 0.0:
        raise MissingKeypoints(f"{arm} arm has coincident keypoints; elbow angle undefined")
    cosang = (ax * bx + ay * by) / (na * nb)
    return math.degrees(math.acos(min(1.0, max(-1.0, cosang))))


def _arm_tip(s: Skeleton, arm: str, kp_min: float) -> Keypoint:
    # Prefer the fingertip; pose models without hand output fall back to the wrist.
    _, _, wrist_name, tip_name = ARM_KEYPOINTS[arm]
    tip = _valid_keypoint(s, tip_name, kp_min)
    return tip if tip is not None else _require_keypoint(s, wrist_name, kp_min)


def select_pointing_arm(s: Skeleton, cfg: PipelineConfig) -> str:
    """Pick the pointing arm.

    Among arms extended past the threshold, take the one whose tip sits
    highest in the frame; with no extended arm, take the straighter one.
    """
    angles: dict[str, float] = {}
    for arm in ARMS:
        try:
            angles[arm] = elbow_angle(s, arm, cfg.kp_min)
        except MissingKeypoints:
            continue
    if not angles:
        raise NoArmDetected("no arm has usable shoulder/elbow/wrist keypoints")
    if len(angles) == 1:
        return next(iter(angles))
    extended = [arm for arm, ang in angles.items() if ang >= cfg.extended_deg]
    if extended:
        return min(extended, key=lambda arm: (_arm_tip(s, arm, cfg.kp_min).v, arm))
    return max(ARMS, key=lambda arm: (angles[arm], arm))


def _keypoint_dir(s: Skeleton, name: str, kp_min: float) -> SphereDir:
    kp = _require_keypoint(s, name, kp_min)
    if isinstance(s.frame, ViewSpec):
        return gnomonic_inverse(s.frame, kp.u, kp.v)
    return lonlat_to_dir(equirect_px_to_lonlat(s.frame, kp.u, kp.v))


def _oriented_normal(origin: SphereDir, tip: SphereDir) -> SphereDir:
    # great_circle_from_two takes the cross product origin x tip, which already
    # makes normal x tip point away from the origin; keep the check anyway so
    # the orientation rule survives refactors of that helper.
    n = great_circle_from_two(origin, tip).normal
    tx, ty, tz = cross_components(n, tip)
    if tx * origin.x + ty * origin.y + tz * origin.z > 0.0:
        n = n.negated()
    return n


def pointing_circle_from_dirs(shoulder: SphereDir, head: SphereDir, tip: SphereDir) -> DirectedPointing:
    """Directed great circle from already-lifted body-point directions.

    Averages the normals of the shoulder->tip and head->tip circles, each
    oriented to travel away from its body point, then anchors the result at
    the tip direction.
    """
    n1 = _oriented_normal(shoulder, tip)
    n2 = _oriented_normal(head, tip)
    sx, sy, sz = n1.x + n2.x, n1.y + n2.y, n1.z + n2.z
    if math.sqrt(sx * sx + sy * sy + sz * sz) < DEGENERATE_CROSS_NORM:
        raise DegenerateCircle("shoulder and head circles have opposing normals")
    return DirectedPointing.from_normal_and_anchor(SphereDir(sx, sy, sz), tip)


def pointing_circle(s: Skeleton, arm: str, kp_min: float = 0.1) -> DirectedPointing:
    """Directed great circle through the pointing gesture.

    Keypoints back-project through the skeleton's own frame, so view-space
    and equirect-space skeletons share this code path.
    """
    shoulder_name = ARM_KEYPOINTS[arm][0]
    tip_kp = _arm_tip(s, arm, kp_min)
    if isinstance(s.frame, ViewSpec):
        tip = gnomonic_inverse(s.frame, tip_kp.u, tip_kp.v)
    else:
        tip = lonlat_to_dir(equirect_px_to_lonlat(s.frame, tip_kp.u, tip_kp.v))
    shoulder = _keypoint_dir(s, shoulder_name, kp_min)
    head = _keypoint_dir(s, "head", kp_min)
    return pointing_circle_from_dirs(shoulder, head, tip)
