"""Object detection on exported scan views."""

import json

import numpy as np
import pytest

from omnipoint_adapters.config import AdapterConfig
from omnipoint_adapters.objects import detect_objects
from omnipoint_adapters.palette import load_image, load_palette
from omnipoint_adapters.wire import validate

ENTRY = {"view_index": 3, "center_lon": 0.5, "center_lat": 0.1, "fov": 1.2, "size": 96, "path": "x.png"}


@pytest.fixture(scope="module")
def palette(corpus):
    return load_palette(corpus / "palette.json")


def _two_categories(palette):
    cats = sorted(palette.categories)
    return cats[0], cats[1]


def test_blocks_and_discs_detected(palette):
    cfg = AdapterConfig()
    cat_a, cat_b = _two_categories(palette)
    image = np.zeros((96, 96, 3), dtype=np.uint8)
    image[20:26, 30:41] = palette.categories[cat_a]  # solid block
    yy, xx = np.mgrid[0:96, 0:96]
    disc = (xx - 70.0) ** 2 + (yy - 60.0) ** 2 <= 10.0**2
    image[disc] = palette.categories[cat_b]

    doc = detect_objects(image, ENTRY, palette, cfg)
    validate(doc, "detections")
    assert doc["view_index"] == 3
    assert doc["metadata"]["model"] == cfg.object_model
    assert doc["metadata"]["palette"] == palette.fingerprint

    by_cat = {d["category"]: d for d in doc["detections"]}
    assert set(by_cat) == {cat_a, cat_b}
    assert by_cat[cat_a]["bbox"] == [30, 20, 41, 26]
    assert by_cat[cat_a]["confidence"] == 1.0  # solid block beats the ellipse ceiling
    # a rasterized disc fills nearly pi/4 of its bbox
    assert by_cat[cat_b]["confidence"] >= 0.9
    # detections come back sorted by category then bbox
    assert [d["category"] for d in doc["detections"]] == sorted(d["category"] for d in doc["detections"])


def test_low_fill_blobs_dropped_by_threshold(palette):
    cat_a, _ = _two_categories(palette)
    image = np.zeros((32, 32, 3), dtype=np.uint8)
    # a thin connected L: 11 px inside a 6x6 bbox, fill ratio ~0.31
    image[10:16, 10] = palette.categories[cat_a]
    image[15, 10:16] = palette.categories[cat_a]

    permissive = detect_objects(image, ENTRY, palette, AdapterConfig(object_threshold=0.05))
    assert len(permissive["detections"]) == 1
    strict = detect_objects(image, ENTRY, palette, AdapterConfig(object_threshold=0.5))
    assert strict["detections"] == []


def test_empty_view_yields_valid_empty_fixture(palette):
    doc = detect_objects(np.zeros((48, 48, 3), dtype=np.uint8), ENTRY, palette, AdapterConfig())
    validate(doc, "detections")
    assert doc["detections"] == []


def test_sample_scan_views_yield_detections(adapted, palette):
    cfg = AdapterConfig()
    sid = sorted(adapted)[0]
    work = adapted[sid]
    manifest = json.loads((work / "views" / "views_scan.json").read_text())
    total = 0
    for entry in manifest["views"]:
        image = load_image(work / "views" / entry["path"])
        doc = detect_objects(image, entry, palette, cfg)
        validate(doc, "detections")
        assert doc["view_index"] == entry["view_index"]
        for det in doc["detections"]:
            assert det["category"] in palette.categories
        total += len(doc["detections"])
    assert total >= 1
