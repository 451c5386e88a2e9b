"""Palette loading and exact-color blob extraction."""

import json
from pathlib import Path

import numpy as np
import pytest

from omnipoint_adapters.config import AdapterConfig
from omnipoint_adapters.errors import InvalidConfig, MissingInput
from omnipoint_adapters.palette import (
    blobs_of,
    color_mask,
    find_palette,
    load_image,
    load_palette,
    mask_bbox,
)


def test_find_palette_prefers_explicit(tmp_path):
    explicit = tmp_path / "weights.json"
    explicit.write_text("{}")
    local = tmp_path / "scene" / "palette.json"
    local.parent.mkdir()
    local.write_text("{}")
    assert find_palette(tmp_path / "scene", explicit) == explicit


def test_find_palette_local_then_parent(tmp_path):
    scene = tmp_path / "scene"
    scene.mkdir()
    parent_palette = tmp_path / "palette.json"
    parent_palette.write_text("{}")
    assert find_palette(scene, None) == parent_palette
    local = scene / "palette.json"
    local.write_text("{}")
    assert find_palette(scene, None) == local


def test_find_palette_missing(tmp_path):
    scene = tmp_path / "scene"
    scene.mkdir()
    with pytest.raises(MissingInput):
        find_palette(scene, None)


def test_load_palette_from_sample(corpus):
    palette = load_palette(corpus / "palette.json")
    assert palette.marker_half_px >= 1
    assert "head" in palette.keypoints
    assert len(palette.fingerprint) == 16
    assert palette.categories  # at least one category color


def test_load_palette_rejects_invalid(tmp_path):
    bad = tmp_path / "palette.json"
    bad.write_text(json.dumps({"schema_version": 1, "background": [0, 0, 0]}))
    with pytest.raises(InvalidConfig):
        load_palette(bad)


def test_load_image_missing(tmp_path):
    with pytest.raises(MissingInput):
        load_image(tmp_path / "absent.png")


def test_color_mask_exact_match_only():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    img[1, 1] = (10, 20, 30)
    img[2, 2] = (10, 20, 31)  # one channel off: not a match
    mask = color_mask(img, (10, 20, 30))
    assert mask.sum() == 1
    assert mask[1, 1]


def test_blobs_sorted_and_filtered():
    mask = np.zeros((20, 20), dtype=bool)
    mask[1:4, 1:4] = True       # 9 px
    mask[10:16, 10:16] = True   # 36 px
    mask[18, 18] = True         # 1 px, below the floor
    blobs = blobs_of(mask, min_pixels=4)
    assert [b.pixels for b in blobs] == [36, 9]
    big = blobs[0]
    assert (big.u0, big.v0, big.u1, big.v1) == (10, 10, 16, 16)
    assert big.width == 6 and big.height == 6
    assert big.fill_ratio == 1.0
    # centroid of a solid block sits at its middle in continuous coords
    assert big.centroid_u == pytest.approx(13.0)
    assert big.centroid_v == pytest.approx(13.0)


def test_blob_counts_ignore_other_labels_in_overlapping_slices():
    # An L-shape whose bounding box fully contains a separate block: the
    # L's pixel count and the block's centroid must each come from their
    # own label only, not from everything inside the bounding slice.
    mask = np.zeros((12, 12), dtype=bool)
    mask[1:9, 1] = True    # vertical arm, rows 1-8, 8 px
    mask[8, 1:9] = True    # horizontal arm, cols 1-8, shares the corner
    mask[3:5, 3:5] = True  # separate 2x2 block inside the L's bbox
    blobs = blobs_of(mask, min_pixels=1)
    assert sorted(b.pixels for b in blobs) == [4, 15]
    block = min(blobs, key=lambda b: b.pixels)
    assert (block.u0, block.v0, block.u1, block.v1) == (3, 3, 5, 5)
    assert block.centroid_u == pytest.approx(4.0)
    assert block.centroid_v == pytest.approx(4.0)


def test_mask_bbox_empty_and_extent():
    assert mask_bbox(np.zeros((5, 5), dtype=bool)) is None
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, 1] = True
    mask[4, 3] = True
    u0, v0, u1, v1, count = mask_bbox(mask)
    assert (u0, v0, u1, v1) == (1, 2, 4, 5)
    assert count == 2


def test_find_palette_via_config_path(corpus, tmp_path):
    cfg = AdapterConfig(palette_path=str(corpus / "palette.json"))
    path = find_palette(tmp_path, Path(cfg.palette_path))
    assert path == corpus / "palette.json"
