"""Region-of-interest views along the pointing circle and candidate building."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .config import PipelineConfig
from .errors import MeridianCircle
from .projection import (
    MAX_VIEW_LAT,
    EquirectGrid,
    LonLatRect,
    SphericalFootprint,
    ViewSpec,
    backproject_bbox,
    footprint_from_equirect_bbox,
    lonlat_to_equirect_px,
    wrapped_rect_iou,
)
from .sphere import (
    DirectedPointing,
    GreatCircle,
    LonLat,
    SphereDir,
    angular_distance_to_circle,
    circle_lat_at_lon,
    dir_to_lonlat,
    point_at_arc,
)

PERSON_CATEGORY = "person"

# Feature order used by the linear model weights.
FEATURE_NAMES = ("circle_dist", "category_freq", "confidence", "area", "horiz_dist")


@dataclass(frozen=True)
class Detection:
    """One detector output box. view_index None means equirect-frame pixels."""

    category: str
    bbox: tuple[float, float, float, float]
    confidence: float
    view_index: Optional[int] = None

    def __post_init__(self):
        if not self.category:
            raise ValueError("detection category must be non-empty")
        if len(self.bbox) != 4:
            raise ValueError("bbox must be (u_min, v_min, u_max, v_max)")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("detection confidence must be in [0, 1]")


@dataclass(frozen=True)
class FeatureVector:
    """Per-candidate features, ordered as FEATURE_NAMES for the linear model."""

    circle_dist: float
    category_freq: float
    confidence: float
    area: float
    horiz_dist: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.circle_dist, self.category_freq, self.confidence, self.area, self.horiz_dist],
            dtype=np.float64,
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


@dataclass(frozen=True)
class Candidate:
    """Deduplicated back-projected detection."""

    id: int
    category: str
    center: SphereDir
    footprint: SphericalFootprint
    confidence: float
    source_views: tuple[int, ...]
    features: Optional[FeatureVector] = None


def scan_views(dp: DirectedPointing, cfg: PipelineConfig) -> list[ViewSpec]:
    """Perspective views stepped along the pointing circle.

    Arc stepping advances a fixed arc length per view. Longitude stepping
    advances a fixed longitude instead and takes the latitude from the circle;
    it falls back to arc stepping for meridian circles, where latitude is not
    a function of longitude. Centers are nudged off the poles to keep
    roll-zero framing defined.
    """
    step = math.radians(cfg.step_deg)
    fov = math.radians(cfg.fov_deg)
    centers: list[LonLat] = []
    if cfg.stepping == "longitude":
        try:
            anchor_ll = dir_to_lonlat(dp.anchor)
            east = (-math.sin(anchor_ll.lon), math.cos(anchor_ll.lon), 0.0)
            sign = 1.0 if (dp.tangent.x * east[0] + dp.tangent.y * east[1]) >= 0.0 else -1.0
            for k in range(cfg.num_views):
                lon = anchor_ll.lon + sign * k * step
                lat = circle_lat_at_lon(dp.circle, lon)
                centers.append(LonLat(lon, lat))
        except MeridianCircle:
            centers = []
    if not centers:
        for k in range(cfg.num_views):
            centers.append(dir_to_lonlat(point_at_arc(dp, k * step)))
    views = []
    for c in centers:
        lat = min(MAX_VIEW_LAT, max(-MAX_VIEW_LAT, c.lat))
        views.append(ViewSpec(LonLat(c.lon, lat), fov, cfg.view_size))
    return views


def _footprint_for(det: Detection, views: Sequence[ViewSpec], grid: EquirectGrid) -> SphericalFootprint:
    if det.view_index is None:
        return footprint_from_equirect_bbox(grid, det.bbox)
    if not 0 <= det.view_index < len(views):
        raise ValueError(f"detection references view {det.view_index} of {len(views)}")
    return backproject_bbox(views[det.view_index], det.bbox)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def build_candidates(
    detections: Sequence[Detection],
    views: Sequence[ViewSpec],
    grid: EquirectGrid,
    cfg: PipelineConfig,
    user_rect: Optional[LonLatRect] = None,
) -> list[Candidate]:
    """Back-project detections and merge duplicates seen in overlapping views.

    Within one category, footprints whose bounding rects overlap at or above
    the dedup threshold merge transitively; the highest-confidence member
    represents the group. Person detections overlapping the user's own box
    are dropped so the pointing person never ranks as a target.
    """
    entries = []  # (det, footprint)
    for det in detections:
        fp = _footprint_for(det, views, grid)
        if (
            user_rect is not None
            and det.category == PERSON_CATEGORY
            and wrapped_rect_iou(fp.lonlat_rect, user_rect) > 0.0
        ):
            continue
        entries.append((det, fp))

    uf = _UnionFind(len(entries))
    for i in range(len(entries)):
        det_i, fp_i = entries[i]
        for j in range(i + 1, len(entries)):
            det_j, fp_j = entries[j]
            if det_i.category != det_j.category:
                continue
            if wrapped_rect_iou(fp_i.lonlat_rect, fp_j.lonlat_rect) >= cfg.dedup_iou:
                uf.union(i, j)

    groups: dict[int, list[int]] = {}
    for i in range(len(entries)):
        groups.setdefault(uf.find(i), []).append(i)

    reps = []
    for members in groups.values():
        best = min(members, key=lambda i: (-entries[i][0].confidence, i))
        det, fp = entries[best]
        source_views = tuple(sorted({entries[i][0].view_index for i in members if entries[i][0].view_index is not None}))
        reps.append((det, fp, source_views))

    def sort_key(item):
        det, fp, _ = item
        view_ord = -1 if det.view_index is None else det.view_index
        return (view_ord, det.bbox, det.category, -det.confidence)

    reps.sort(key=sort_key)
    return [
        Candidate(
            id=i,
            category=det.category,
            center=fp.center,
            footprint=fp,
            confidence=det.confidence,
            source_views=source_views,
        )
        for i, (det, fp, source_views) in enumerate(reps)
    ]


def _wrapped_lon_gap(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def compute_features(
    candidates: Sequence[Candidate],
    dp: DirectedPointing,
    user: LonLat,
    freq_table: dict,
    cfg: PipelineConfig,
    grid: Optional[EquirectGrid] = None,
) -> list[Candidate]:
    """Attach the ranking features to each candidate.

    Area is the footprint solid angle by default; the pixel mode converts the
    footprint's bounding rect to equirect pixel area instead and needs the
    grid for the conversion.
    """
    if cfg.area_unit == "pixel" and grid is None:
        raise ValueError("pixel area unit needs the equirect grid")
    out = []
    for cand in candidates:
        center_ll = dir_to_lonlat(cand.center)
        if cfg.area_unit == "pixel":
            rect = cand.footprint.lonlat_rect
            area = (rect.lon_span * grid.width / (2.0 * math.pi)) * (rect.lat_span * grid.height / math.pi)
        else:
            area = cand.footprint.area
        fv = FeatureVector(
            circle_dist=angular_distance_to_circle(dp.circle, cand.center),
            category_freq=float(freq_table.get(cand.category, 0.0)),
            confidence=cand.confidence,
            area=area,
            horiz_dist=_wrapped_lon_gap(center_ll.lon, user.lon),
        )
        out.append(replace(cand, features=fv))
    return out


def equirect_px_distance_to_circle(
    grid: EquirectGrid, circle: GreatCircle, d: SphereDir, samples: int = 1440
) -> float:
    """Approximate pixel distance from a direction to the drawn circle.

    Samples the circle, maps everything to equirect pixels, and takes the
    closest sample with horizontal wrap. The angular distance feature is the
    canonical one; this helper exists for pixel-space comparisons only.
    """
    n = circle.normal.as_array()
    seed = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(n, seed)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    theta = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    pts = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    lon = np.arctan2(pts[:, 1], pts[:, 0])
    lat = np.arcsin(np.clip(pts[:, 2], -1.0, 1.0))
    cu = (lon + math.pi) * grid.width / (2.0 * math.pi) - 0.5
    cv = (math.pi / 2.0 - lat) * grid.height / math.pi - 0.5
    pu, pv = lonlat_to_equirect_px(grid, dir_to_lonlat(d))
    du = np.abs(cu - pu) % grid.width
    du = np.minimum(du, grid.width - du)
    dv = cv - pv
    return float(np.sqrt(du * du + dv * dv).min())
