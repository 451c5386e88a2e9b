"""Equirectangular <-> sphere mapping, gnomonic views, and box back-projection.

Pixel-center convention throughout: a pixel with integer index i covers the
continuous coordinate range [i, i+1) and has its center at i + 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import BehindView, DegenerateBox, OutOfGrid, TooFewVertices
from .sphere import (
    HALF_PI,
    TWO_PI,
    LonLat,
    SphereDir,
    lonlat_to_dir,
    wrap_lon,
)

# View centers this close to a pole leave no usable east direction.
MAX_VIEW_LAT = math.radians(89.9)

# Forward projection rejects directions with f . d at or below this.
BEHIND_EPS = 1e-6

# Consecutive polygon vertices closer than this count as one vertex.
VERTEX_MERGE_EPS = 1e-12


@dataclass(frozen=True)
class EquirectGrid:
    """Equirectangular image geometry. Width must be exactly twice the height."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 2 or self.width != 2 * self.height:
            raise ValueError(f"grid must satisfy width == 2 * height >= 2, got {self.width}x{self.height}")


@dataclass(frozen=True)
class ViewSpec:
    """Perspective view: center direction, field of view, square output size.

    Roll is fixed at zero, i.e. image up points toward the north pole, which
    is why centers within 0.1 deg of a pole are rejected.
    """

    center: LonLat
    fov: float
    size: int

    def __post_init__(self):
        if not 0.0 < self.fov < math.pi:
            raise ValueError(f"fov must be in (0, pi), got {self.fov!r}")
        if self.size < 2:
            raise ValueError(f"view size must be >= 2, got {self.size!r}")
        if abs(self.center.lat) > MAX_VIEW_LAT + 1e-12:
            raise ValueError("view center too close to a pole for roll-zero framing")

    @property
    def focal(self) -> float:
        return (self.size / 2.0) / math.tan(self.fov / 2.0)

    @classmethod
    def from_degrees(cls, lon_deg: float, lat_deg: float, fov_deg: float, size: int) -> "ViewSpec":
        return cls(LonLat.from_degrees(lon_deg, lat_deg), math.radians(fov_deg), size)


@dataclass(frozen=True)
class LonLatRect:
    """Longitude/latitude rectangle; lon_max may exceed pi to express seam wrap."""

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if not -math.pi <= self.lon_min < math.pi:
            raise ValueError("lon_min must lie in [-pi, pi)")
        if self.lon_max < self.lon_min or self.lon_max - self.lon_min > TWO_PI + 1e-12:
            raise ValueError("need lon_min <= lon_max <= lon_min + 2*pi")
        if self.lat_max < self.lat_min or abs(self.lat_min) > HALF_PI + 1e-12 or abs(self.lat_max) > HALF_PI + 1e-12:
            raise ValueError("latitude bounds out of order or range")

    @property
    def lon_span(self) -> float:
        return self.lon_max - self.lon_min

    @property
    def lat_span(self) -> float:
        return self.lat_max - self.lat_min

    def area(self) -> float:
        """Flat lon x lat area element, matching the IoU convention."""
        return self.lon_span * self.lat_span


@dataclass(frozen=True)
class SphericalFootprint:
    """Back-projected box: boundary ring, center, solid angle, bounding rect."""

    boundary: tuple[SphereDir, ...]
    center: SphereDir
    area: float
    lonlat_rect: LonLatRect


def equirect_px_to_lonlat(grid: EquirectGrid, u: float, v: float) -> LonLat:
    """Angular position of a continuous pixel coordinate."""
    if not (0.0 <= u < grid.width) or not (0.0 <= v < grid.height):
        raise OutOfGrid(f"pixel ({u!r}, {v!r}) outside {grid.width}x{grid.height}")
    lon, lat = _px_to_lonlat_raw(grid, u, v)
    return LonLat(lon, lat)


def _px_to_lonlat_raw(grid: EquirectGrid, u: float, v: float) -> tuple[float, float]:
    # No bounds check: callers use this for box corners that may touch W or H.
    lon = TWO_PI * (u + 0.5) / grid.width - math.pi
    lat = HALF_PI - math.pi * (v + 0.5) / grid.height
    return lon, min(HALF_PI, max(-HALF_PI, lat))


def lonlat_to_equirect_px(grid: EquirectGrid, p: LonLat) -> tuple[float, float]:
    """Continuous pixel coordinate of an angular position.

    The horizontal coordinate wraps modulo the grid width; the vertical one
    clamps to [0, height - 1].
    """
    u = (p.lon + math.pi) * grid.width / TWO_PI - 0.5
    v = (HALF_PI - p.lat) * grid.height / math.pi - 0.5
    u = u % grid.width
    v = min(float(grid.height - 1), max(0.0, v))
    return u, v


def _camera_frame(vs: ViewSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (forward, right, up) with right toward increasing lon and
    up along the meridian toward the north pole."""
    f = lonlat_to_dir(vs.center).as_array()
    north = np.array([0.0, 0.0, 1.0])
    r = np.cross(north, f)
    r /= np.linalg.norm(r)  # nonzero: |center.lat| <= 89.9 deg
    up = np.cross(f, r)
    return f, r, up


def gnomonic_forward(vs: ViewSpec, d: SphereDir) -> tuple[float, float]:
    """Project a direction into view pixel coordinates."""
    f, r, up = _camera_frame(vs)
    da = d.as_array()
    c = float(f @ da)
    if c <= BEHIND_EPS:
        raise BehindView(f"direction behind view plane (f.d = {c!r})")
    half = vs.size / 2.0
    u = half + vs.focal * float(r @ da) / c
    v = half - vs.focal * float(up @ da) / c
    return u, v


def gnomonic_inverse(vs: ViewSpec, u: float, v: float) -> SphereDir:
    """Direction seen at a view pixel coordinate."""
    half = vs.size / 2.0
    x = (u - half) / vs.focal
    y = (half - v) / vs.focal
    f, r, up = _camera_frame(vs)
    return SphereDir.from_array(f + x * r + y * up)


def gnomonic_forward_array(vs: ViewSpec, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized forward projection.

    Args:
        dirs: (..., 3) unit directions.
    Returns:
        (u, v, in_front) where u, v are valid only where in_front is True.
    """
    f, r, up = _camera_frame(vs)
    c = dirs @ f
    in_front = c > BEHIND_EPS
    safe = np.where(in_front, c, 1.0)
    half = vs.size / 2.0
    u = half + vs.focal * (dirs @ r) / safe
    v = half - vs.focal * (dirs @ up) / safe
    return u, v, in_front


def gnomonic_inverse_array(vs: ViewSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized inverse projection to (..., 3) unit directions."""
    half = vs.size / 2.0
    x = (np.asarray(u, dtype=np.float64) - half) / vs.focal
    y = (half - np.asarray(v, dtype=np.float64)) / vs.focal
    f, r, up = _camera_frame(vs)
    dirs = f + x[..., None] * r + y[..., None] * up
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    return dirs


def render_view(image: np.ndarray, vs: ViewSpec) -> np.ndarray:
    """Resample an equirectangular image into a perspective view.

    Bilinear interpolation with horizontal wrap and vertical clamp. The output
    is computed in one deterministic vectorized pass, so the bytes do not
    depend on any parallelism setting.
    """
    if image.ndim not in (2, 3):
        raise ValueError("image must be HxW or HxWxC")
    h, w = image.shape[:2]
    EquirectGrid(w, h)  # validates the 2:1 shape
    n = vs.size

    jj, ii = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    dirs = gnomonic_inverse_array(vs, ii + 0.5, jj + 0.5)
    lon = np.arctan2(dirs[..., 1], dirs[..., 0])
    lat = np.arcsin(np.clip(dirs[..., 2], -1.0, 1.0))

    # Continuous px coords, then shift into index space (pixel i sits at i+0.5).
    ue = (lon + math.pi) * w / TWO_PI - 0.5
    ve = (HALF_PI - lat) * h / math.pi - 0.5
    sx = ue - 0.5
    sy = ve - 0.5

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    tx = sx - x0
    ty = sy - y0
    x0 = x0.astype(np.int64) % w
    x1 = (x0 + 1) % w
    y1 = np.clip(y0 + 1, 0, h - 1).astype(np.int64)
    y0 = np.clip(y0, 0, h - 1).astype(np.int64)

    img = image.astype(np.float64)
    if img.ndim == 3:
        tx = tx[..., None]
        ty = ty[..., None]
    out = (
        img[y0, x0] * (1.0 - tx) * (1.0 - ty)
        + img[y0, x1] * tx * (1.0 - ty)
        + img[y1, x0] * (1.0 - tx) * ty
        + img[y1, x1] * tx * ty
    )
    if np.issubdtype(image.dtype, np.integer):
        return np.clip(np.rint(out), 0, 255).astype(image.dtype)
    return out.astype(image.dtype)


def _perimeter_points(bbox: tuple[float, float, float, float], samples_per_edge: int) -> list[tuple[float, float]]:
    u0, v0, u1, v1 = bbox
    pts = []
    for k in range(samples_per_edge):
        t = k / samples_per_edge
        pts.append((u0 + t * (u1 - u0), v0))
    for k in range(samples_per_edge):
        t = k / samples_per_edge
        pts.append((u1, v0 + t * (v1 - v0)))
    for k in range(samples_per_edge):
        t = k / samples_per_edge
        pts.append((u1 - t * (u1 - u0), v1))
    for k in range(samples_per_edge):
        t = k / samples_per_edge
        pts.append((u0, v1 - t * (v1 - v0)))
    return pts


def _check_bbox(bbox, limit_u: float, limit_v: float) -> tuple[float, float, float, float]:
    u0, v0, u1, v1 = (float(x) for x in bbox)
    u0, u1 = max(0.0, u0), min(limit_u, u1)
    v0, v1 = max(0.0, v0), min(limit_v, v1)
    if u1 - u0 <= 1e-9 or v1 - v0 <= 1e-9:
        raise DegenerateBox(f"box {bbox!r} has no positive extent inside the frame")
    return u0, v0, u1, v1


def wrapped_rect_from_lonlats(points: list[tuple[float, float]], center: tuple[float, float]) -> LonLatRect:
    """Smallest lon/lat rectangle covering the points, unwrapped around their
    circular mean longitude so that a seam crossing stays contiguous."""
    lons = np.array([p[0] for p in points] + [center[0]])
    lats = [p[1] for p in points] + [center[1]]
    s, c = np.sin(lons).mean(), np.cos(lons).mean()
    ref = center[0] if (s * s + c * c) < 1e-18 else math.atan2(s, c)
    rel = [wrap_lon(lo - ref) for lo in lons]
    lon_min = ref + min(rel)
    lon_max = ref + max(rel)
    shift = wrap_lon(lon_min) - lon_min  # multiple of 2*pi
    return LonLatRect(lon_min + shift, lon_max + shift, min(lats), max(lats))


def backproject_bbox(vs: ViewSpec, bbox: tuple[float, float, float, float], samples_per_edge: int = 8) -> SphericalFootprint:
    """Lift a view-space box onto the sphere.

    The boundary ring samples the box perimeter through the inverse
    projection; the area is the solid angle of that ring.
    """
    if samples_per_edge < 1:
        raise ValueError("samples_per_edge must be >= 1")
    u0, v0, u1, v1 = _check_bbox(bbox, float(vs.size), float(vs.size))
    boundary = tuple(gnomonic_inverse(vs, u, v) for u, v in _perimeter_points((u0, v0, u1, v1), samples_per_edge))
    center = gnomonic_inverse(vs, (u0 + u1) / 2.0, (v0 + v1) / 2.0)
    area = spherical_polygon_area(list(boundary))
    clonlat = (math.atan2(center.y, center.x), math.asin(min(1.0, max(-1.0, center.z))))
    lonlats = [(math.atan2(d.y, d.x), math.asin(min(1.0, max(-1.0, d.z)))) for d in boundary]
    rect = wrapped_rect_from_lonlats(lonlats, clonlat)
    return SphericalFootprint(boundary, center, area, rect)


def footprint_from_equirect_bbox(grid: EquirectGrid, bbox: tuple[float, float, float, float], samples_per_edge: int = 8) -> SphericalFootprint:
    """Lift an equirect-space box onto the sphere (whole-image detection path)."""
    if samples_per_edge < 1:
        raise ValueError("samples_per_edge must be >= 1")
    u0, v0, u1, v1 = _check_bbox(bbox, float(grid.width), float(grid.height))
    lonlats = [_px_to_lonlat_raw(grid, u, v) for u, v in _perimeter_points((u0, v0, u1, v1), samples_per_edge)]
    boundary = tuple(lonlat_to_dir(LonLat(lo, la)) for lo, la in lonlats)
    clonlat = _px_to_lonlat_raw(grid, (u0 + u1) / 2.0, (v0 + v1) / 2.0)
    center = lonlat_to_dir(LonLat(*clonlat))
    area = spherical_polygon_area(list(boundary))
    rect = wrapped_rect_from_lonlats(lonlats, clonlat)
    return SphericalFootprint(boundary, center, area, rect)


def _signed_triangle_excess(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    # Signed solid angle of the spherical triangle (a, b, c).
    det = float(a @ np.cross(b, c))
    den = 1.0 + float(a @ b) + float(b @ c) + float(c @ a)
    return 2.0 * math.atan2(det, den)


def spherical_polygon_area(boundary: list[SphereDir]) -> float:
    """Solid angle of a simple spherical polygon, in steradians.

    Sums signed triangle excesses fanned from the normalized vertex centroid;
    the absolute value makes the result orientation-independent.
    """
    verts = [d.as_array() for d in boundary]
    cleaned: list[np.ndarray] = []
    for v in verts:
        if not cleaned or np.linalg.norm(v - cleaned[-1]) > VERTEX_MERGE_EPS:
            cleaned.append(v)
    if len(cleaned) > 1 and np.linalg.norm(cleaned[0] - cleaned[-1]) <= VERTEX_MERGE_EPS:
        cleaned.pop()
    if len(cleaned) < 3:
        raise TooFewVertices(f"need >= 3 distinct vertices, got {len(cleaned)}")
    centroid = np.sum(cleaned, axis=0)
    norm = np.linalg.norm(centroid)
    apex = cleaned[0] if norm < 1e-9 else centroid / norm
    total = 0.0
    for i, v in enumerate(cleaned):
        w = cleaned[(i + 1) % len(cleaned)]
        total += _signed_triangle_excess(apex, v, w)
    return abs(total)


def _overlap(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def wrapped_rect_iou(a: LonLatRect, b: LonLatRect) -> float:
    """IoU of two lon/lat rectangles with a flat lon x lat area element.

    Seam wrap is handled by overlapping the second rect at all three 2*pi
    placements; a pair of arcs can meet on both sides of the seam, and the
    placements sum to the full circular overlap.
    """
    lat_inter = _overlap(a.lat_min, a.lat_max, b.lat_min, b.lat_max)
    if lat_inter == 0.0:
        return 0.0
    lon_inter = 0.0
    for shift in (-TWO_PI, 0.0, TWO_PI):
        lon_inter += _overlap(a.lon_min, a.lon_max, b.lon_min + shift, b.lon_max + shift)
    lon_inter = min(lon_inter, a.lon_span, b.lon_span)
    inter = lon_inter * lat_inter
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def load_png(path) -> np.ndarray:
    """Read an image file as an HxWx3 uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_png(path, image: np.ndarray) -> None:
    """Write an HxWx3 uint8 array as PNG."""
    Image.fromarray(np.ascontiguousarray(image), mode="RGB").save(path, format="PNG")
