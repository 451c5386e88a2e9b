"""Panorama annotation drawing: circle polyline, ranked boxes, seam handling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from omnipoint.annotate import (
    annotation_boxes_from_result,
    circle_polyline,
    draw_annotation,
    _rect_px_parts,
)
from omnipoint.config import PipelineConfig
from omnipoint.fixtures import load_scene
from omnipoint.pipeline import ModeFlags, estimate, result_to_dict
from omnipoint.projection import EquirectGrid, LonLatRect, load_png
from omnipoint.sphere import (
    DirectedPointing,
    LonLat,
    SphereDir,
    lonlat_to_dir,
)


def _equator_dp() -> DirectedPointing:
    return DirectedPointing.from_normal_and_anchor(
        SphereDir(0.0, 0.0, 1.0), lonlat_to_dir(LonLat(0.0, 0.0))
    )


def test_circle_polyline_points_lie_on_circle():
    dp = DirectedPointing.from_normal_and_anchor(SphereDir(0.3, -0.2, 1.0), SphereDir(1.0, 0.0, 0.1))
    pts = circle_polyline(dp, samples=360)
    assert len(pts) == 360
    for ll in pts:
        d = lonlat_to_dir(ll)
        assert abs(dp.circle.normal.dot(d)) < 1e-9
    first = lonlat_to_dir(pts[0])
    assert first.dot(dp.anchor) > 1.0 - 1e-12  # starts at the anchor


def test_circle_polyline_even_spacing():
    dp = _equator_dp()
    pts = circle_polyline(dp, samples=8)
    dirs = [lonlat_to_dir(p) for p in pts]
    for a, b in zip(dirs, dirs[1:]):
        gap = math.acos(max(-1.0, min(1.0, a.dot(b))))
        assert gap == pytest.approx(2.0 * math.pi / 8.0, abs=1e-9)


def test_rect_px_parts_plain_and_seam():
    grid = EquirectGrid(1920, 960)
    plain = _rect_px_parts(grid, LonLatRect(0.0, 0.5, -0.1, 0.1))
    assert len(plain) == 1
    # A rect whose lon span crosses the +/-pi seam splits into two pieces.
    seam = _rect_px_parts(grid, LonLatRect(math.radians(170.0), math.radians(190.0), -0.1, 0.1))
    assert len(seam) == 2
    left, right = seam
    assert left[2] == grid.width - 1.0
    assert right[0] == 0.0


def test_draw_annotation_dims_and_determinism():
    grid = EquirectGrid(256, 128)
    image = np.full((128, 256, 3), 20, dtype=np.uint8)
    boxes = [(1, "chair", LonLatRect(0.2, 0.6, -0.2, 0.2)),
             (2, "cup", LonLatRect(-1.0, -0.5, -0.3, 0.1))]
    out1 = draw_annotation(image, grid, _equator_dp(), boxes)
    out2 = draw_annotation(image, grid, _equator_dp(), boxes)
    assert out1.shape == image.shape
    assert out1.dtype == np.uint8
    assert np.array_equal(out1, out2)
    assert not np.array_equal(out1, image)  # something was drawn
    assert np.array_equal(image, np.full((128, 256, 3), 20, dtype=np.uint8))  # input untouched


def test_draw_annotation_rejects_dim_mismatch():
    grid = EquirectGrid(256, 128)
    with pytest.raises(ValueError):
        draw_annotation(np.zeros((64, 256, 3), dtype=np.uint8), grid, _equator_dp(), [])


def test_draw_annotation_top_k_limits_boxes():
    grid = EquirectGrid(256, 128)
    image = np.zeros((128, 256, 3), dtype=np.uint8)
    boxes = [(1, "chair", LonLatRect(0.2, 0.6, -0.2, 0.2)),
             (2, "cup", LonLatRect(-1.0, -0.5, -0.3, 0.1))]
    all_boxes = draw_annotation(image, grid, _equator_dp(), boxes)
    only_first = draw_annotation(image, grid, _equator_dp(), boxes, top_k=1)
    assert not np.array_equal(all_boxes, only_first)
    # the top-1 color appears in both, the runner-up color only without top_k
    assert (only_first == np.array([255, 64, 64])).all(axis=-1).any()
    assert not (only_first == np.array([64, 208, 255])).all(axis=-1).any()
    assert (all_boxes == np.array([64, 208, 255])).all(axis=-1).any()


def test_annotation_boxes_from_result_preserves_rank_order(rendered_scene):
    scene = load_scene(rendered_scene)
    res = estimate(scene, PipelineConfig(), ModeFlags(True, True, "distance"))
    doc = result_to_dict(res)
    boxes = annotation_boxes_from_result(doc)
    assert [b[0] for b in boxes] == [c["rank"] for c in doc["candidates"]]
    assert [b[1] for b in boxes] == [c["category"] for c in doc["candidates"]]
    for (_, _, rect), cand in zip(boxes, doc["candidates"]):
        assert rect.lon_min == cand["lonlat_rect"]["lon_min"]


def test_annotate_rendered_scene_end_to_end(rendered_scene):
    scene = load_scene(rendered_scene)
    image = load_png(scene.image_path)
    res = estimate(scene, PipelineConfig(), ModeFlags(True, True, "distance"))
    boxes = annotation_boxes_from_result(result_to_dict(res))
    out = draw_annotation(image, scene.grid, res.pointing, boxes)
    assert out.shape == image.shape
    # circle color must appear along the drawn polyline
    assert (out == np.array([255, 214, 0])).all(axis=-1).any()
