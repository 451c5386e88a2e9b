"""Draw the estimated pointing circle and ranked candidate boxes on a panorama."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw

from .projection import EquirectGrid, LonLatRect, lonlat_to_equirect_px
from .sphere import TWO_PI, DirectedPointing, LonLat, dir_to_lonlat, point_at_arc

CIRCLE_COLOR = (255, 214, 0)
TOP_COLOR = (255, 64, 64)
BOX_COLOR = (64, 208, 255)
TEXT_BG = (0, 0, 0)
CIRCLE_SAMPLES = 720


def circle_polyline(dp: DirectedPointing, samples: int = CIRCLE_SAMPLES) -> list[LonLat]:
    """Evenly spaced positions along the full pointing circle, from the anchor."""
    out = []
    for k in range(samples):
        theta = TWO_PI * k / samples
        out.append(dir_to_lonlat(point_at_arc(dp, theta)))
    return out


def _polyline_segments(grid: EquirectGrid, points: Sequence[LonLat]) -> list[list[tuple[float, float]]]:
    """Pixel segments of a closed spherical polyline, split where it crosses the seam."""
    px = [lonlat_to_equirect_px(grid, p) for p in points]
    segments: list[list[tuple[float, float]]] = []
    current = [px[0]]
    for prev, cur in zip(px, px[1:] + [px[0]]):
        if abs(cur[0] - prev[0]) > grid.width / 2.0:
            segments.append(current)
            current = []
        current.append(cur)
    if current:
        segments.append(current)
    return [seg for seg in segments if len(seg) >= 2]


def _rect_px_parts(grid: EquirectGrid, rect: LonLatRect) -> list[tuple[float, float, float, float]]:
    """Pixel-space pieces of a lon/lat rect, split in two when it wraps the seam."""
    u0 = (rect.lon_min + math.pi) * grid.width / TWO_PI - 0.5
    width_px = rect.lon_span * grid.width / TWO_PI
    v0 = (math.pi / 2.0 - rect.lat_max) * grid.height / math.pi - 0.5
    v1 = (math.pi / 2.0 - rect.lat_min) * grid.height / math.pi - 0.5
    u1 = u0 + width_px
    if u1 <= grid.width - 1:
        return [(u0, v0, u1, v1)]
    return [
        (u0, v0, grid.width - 1.0, v1),
        (0.0, v0, u1 - grid.width, v1),
    ]


def draw_annotation(
    image: np.ndarray,
    grid: EquirectGrid,
    dp: DirectedPointing,
    boxes: Sequence[tuple[int, str, LonLatRect]],
    top_k: Optional[int] = None,
) -> np.ndarray:
    """Overlay the pointing circle and the ranked candidate boxes.

    boxes holds (rank, category, rect) triples; each label reads
    "<rank> <category>". Output dimensions equal the input dimensions.
    """
    if image.shape[0] != grid.height or image.shape[1] != grid.width:
        raise ValueError(
            f"image is {image.shape[1]}x{image.shape[0]}, grid says {grid.width}x{grid.height}"
        )
    img = Image.fromarray(np.ascontiguousarray(image), mode="RGB")
    draw = ImageDraw.Draw(img)
    for seg in _polyline_segments(grid, circle_polyline(dp)):
        draw.line(seg, fill=CIRCLE_COLOR, width=3)
    shown = sorted(boxes, key=lambda b: b[0])
    if top_k is not None:
        shown = shown[:top_k]
    for rank, category, rect in reversed(shown):
        color = TOP_COLOR if rank == 1 else BOX_COLOR
        label = f"{rank} {category}"
        for i, (u0, v0, u1, v1) in enumerate(_rect_px_parts(grid, rect)):
            draw.rectangle([u0, v0, u1, v1], outline=color, width=3)
            if i == 0:
                tx, ty = u0 + 2, max(0.0, v0 - 13)
                w = draw.textlength(label)
                draw.rectangle([tx - 1, ty - 1, tx + w + 1, ty + 11], fill=TEXT_BG)
                draw.text((tx, ty), label, fill=color)
    return np.asarray(img, dtype=np.uint8)


def annotation_boxes_from_result(result_doc: dict) -> list[tuple[int, str, LonLatRect]]:
    """(rank, category, rect) triples from a serialized result record."""
    out = []
    for cand in result_doc["candidates"]:
        r = cand["lonlat_rect"]
        out.append(
            (
                int(cand["rank"]),
                cand["category"],
                LonLatRect(r["lon_min"], r["lon_max"], r["lat_min"], r["lat_max"]),
            )
        )
    return out
