"""Directions, great circles, and directed arcs on the unit viewing sphere.

All angles are radians. Longitude lives in [-pi, pi) around the +z (north)
axis with lon 0 on the +x axis; latitude in [-pi/2, pi/2], positive north.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCircle, MeridianCircle

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# Cross products shorter than this define no usable plane normal.
DEGENERATE_CROSS_NORM = 1e-9

# |normal.z| below this makes the circle a meridian pair: latitude is not a
# function of longitude there.
MERIDIAN_NZ = 1e-9


def wrap_lon(lon: float) -> float:
    """Wrap a longitude into [-pi, pi)."""
    return (lon + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class LonLat:
    """Angular position on the sphere. Construction wraps lon into [-pi, pi)."""

    lon: float
    lat: float

    def __post_init__(self):
        lat = self.lat
        if abs(lat) > HALF_PI + 1e-9:
            raise ValueError(f"latitude out of range: {lat!r}")
        lat = min(HALF_PI, max(-HALF_PI, lat))
        # Poles carry no usable longitude; normalize it to 0.
        lon = 0.0 if abs(lat) == HALF_PI else wrap_lon(self.lon)
        object.__setattr__(self, "lon", lon)
        object.__setattr__(self, "lat", lat)

    @classmethod
    def from_degrees(cls, lon_deg: float, lat_deg: float) -> "LonLat":
        return cls(math.radians(lon_deg), math.radians(lat_deg))


@dataclass(frozen=True)
class SphereDir:
    """Unit direction vector. Construction normalizes; zero vectors raise."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if norm < 1e-12:
            raise ValueError("direction vector has (near-)zero length")
        object.__setattr__(self, "x", self.x / norm)
        object.__setattr__(self, "y", self.y / norm)
        object.__setattr__(self, "z", self.z / norm)

    def dot(self, other: "SphereDir") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def negated(self) -> "SphereDir":
        return SphereDir(-self.x, -self.y, -self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @classmethod
    def from_array(cls, a) -> "SphereDir":
        return cls(float(a[0]), float(a[1]), float(a[2]))


def cross_components(a: SphereDir, b: SphereDir) -> tuple[float, float, float]:
    """Raw cross product components (not normalized, may be near zero)."""
    return (
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )


@dataclass(frozen=True)
class GreatCircle:
    """Great circle identified by its unit plane normal."""

    normal: SphereDir


@dataclass(frozen=True)
class DirectedPointing:
    """Great circle plus a start point and travel direction along it.

    The tangent is the cross product normal x anchor, so the arc parameter in
    point_at_arc advances along the circle in the pointing direction.
    """

    circle: GreatCircle
    anchor: SphereDir
    tangent: SphereDir

    @classmethod
    def from_normal_and_anchor(cls, normal: SphereDir, anchor_hint: SphereDir) -> "DirectedPointing":
        """Build from a plane normal and a point to project onto that plane."""
        k = normal.dot(anchor_hint)
        ax = anchor_hint.x - k * normal.x
        ay = anchor_hint.y - k * normal.y
        az = anchor_hint.z - k * normal.z
        if math.sqrt(ax * ax + ay * ay + az * az) < DEGENERATE_CROSS_NORM:
            raise DegenerateCircle("anchor hint is (anti)parallel to the circle normal")
        anchor = SphereDir(ax, ay, az)
        tangent = SphereDir(*cross_components(normal, anchor))
        return cls(GreatCircle(normal), anchor, tangent)


def lonlat_to_dir(p: LonLat) -> SphereDir:
    """Unit direction for an angular position."""
    cl = math.cos(p.lat)
    return SphereDir(cl * math.cos(p.lon), cl * math.sin(p.lon), math.sin(p.lat))


def dir_to_lonlat(d: SphereDir) -> LonLat:
    """Angular position of a unit direction; lon is 0 at the poles."""
    z = min(1.0, max(-1.0, d.z))
    lat = math.asin(z)
    if d.x == 0.0 and d.y == 0.0:
        return LonLat(0.0, lat)
    return LonLat(math.atan2(d.y, d.x), lat)


def great_circle_from_two(p1: SphereDir, p2: SphereDir) -> GreatCircle:
    """Great circle through two directions, normal along p1 x p2."""
    cx, cy, cz = cross_components(p1, p2)
    if math.sqrt(cx * cx + cy * cy + cz * cz) < DEGENERATE_CROSS_NORM:
        raise DegenerateCircle("directions are too close or antipodal")
    return GreatCircle(SphereDir(cx, cy, cz))


def angular_distance_to_circle(c: GreatCircle, p: SphereDir) -> float:
    """Unsigned angular distance from a direction to a great circle, in [0, pi/2]."""
    return math.asin(min(1.0, abs(c.normal.dot(p))))


def point_at_arc(dp: DirectedPointing, theta: float) -> SphereDir:
    """Point reached after traveling arc length theta from the anchor."""
    ct, st = math.cos(theta), math.sin(theta)
    return SphereDir(
        dp.anchor.x * ct + dp.tangent.x * st,
        dp.anchor.y * ct + dp.tangent.y * st,
        dp.anchor.z * ct + dp.tangent.z * st,
    )


def circle_lat_at_lon(c: GreatCircle, lon: float) -> float:
    """Latitude where the circle crosses the given longitude.

    Solves n . p(lon, lat) = 0 for lat. Raises MeridianCircle when the circle
    passes through the poles and the latitude is not a function of longitude.
    """
    n = c.normal
    if abs(n.z) < MERIDIAN_NZ:
        raise MeridianCircle("circle passes through the poles")
    return math.atan(-(n.x * math.cos(lon) + n.y * math.sin(lon)) / n.z)
