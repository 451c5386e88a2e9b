"""Marker-color detector backend: palette loading and blob extraction.

The backend treats a rendering palette as its model weights: every
person, keypoint, and object category owns one exact RGB color, so
detection is color matching plus connected-component analysis. Bilinear
resampling in the perspective renderer blends colors only along blob
edges, which exact matching simply excludes; blob interiors survive.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import MissingInput
from .wire import load_json, validate

PALETTE_FILENAME = "palette.json"


@dataclass(frozen=True)
class Palette:
    """Color assignments for one rendered corpus, plus a weights fingerprint."""

    person: tuple[int, int, int]
    categories: dict[str, tuple[int, int, int]]
    keypoints: dict[str, tuple[int, int, int]]
    marker_half_px: int
    fingerprint: str


def find_palette(in_dir, explicit: Optional[str]) -> Path:
    """Resolve the palette file: explicit config path, else next to or above the input."""
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            raise MissingInput(f"palette file not found: {path}")
        return path
    in_dir = Path(in_dir)
    for candidate in (in_dir / PALETTE_FILENAME, in_dir.parent / PALETTE_FILENAME):
        if candidate.is_file():
            return candidate
    raise MissingInput(
        f"no {PALETTE_FILENAME} next to or above {in_dir}; pass palette_path in the adapter config"
    )


def load_palette(path) -> Palette:
    doc = load_json(path)
    validate(doc, "palette")
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
    return Palette(
        person=tuple(int(c) for c in doc["person"]),
        categories={k: tuple(int(c) for c in v) for k, v in doc["categories"].items()},
        keypoints={k: tuple(int(c) for c in v) for k, v in doc["keypoints"].items()},
        marker_half_px=int(doc["marker_half_px"]),
        fingerprint=digest,
    )


def load_image(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"image not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def color_mask(image: np.ndarray, rgb: tuple[int, int, int]) -> np.ndarray:
    """Boolean mask of pixels exactly matching one palette color."""
    return np.all(image == np.array(rgb, dtype=np.uint8), axis=-1)


@dataclass(frozen=True)
class Blob:
    """One connected component: box edges in continuous pixels plus statistics."""

    u0: float
    v0: float
    u1: float
    v1: float
    pixels: int
    centroid_u: float
    centroid_v: float

    @property
    def width(self) -> float:
        return self.u1 - self.u0

    @property
    def height(self) -> float:
        return self.v1 - self.v0

    @property
    def fill_ratio(self) -> float:
        return self.pixels / (self.width * self.height)


def blobs_of(mask: np.ndarray, min_pixels: int) -> list[Blob]:
    """Connected components of a mask as pixel-edge bounding boxes, largest first."""
    labels, count = ndimage.label(mask)
    out = []
    for index, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        component = labels[sl] == index
        pixels = int(np.count_nonzero(component))
        if pixels < min_pixels:
            continue
        v_sl, u_sl = sl
        rows, cols = np.nonzero(component)
        out.append(
            Blob(
                u0=float(u_sl.start),
                v0=float(v_sl.start),
                u1=float(u_sl.stop),
                v1=float(v_sl.stop),
                pixels=pixels,
                centroid_u=float(cols.mean()) + float(u_sl.start) + 0.5,
                centroid_v=float(rows.mean()) + float(v_sl.start) + 0.5,
            )
        )
    out.sort(key=lambda b: (-b.pixels, b.u0, b.v0))
    return out


def mask_bbox(mask: np.ndarray) -> Optional[tuple[float, float, float, float, int]]:
    """Overall pixel-edge bounding box of a mask, or None when empty."""
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return None
    return (
        float(cols.min()),
        float(rows.min()),
        float(cols.max() + 1),
        float(rows.max() + 1),
        int(rows.size),
    )
