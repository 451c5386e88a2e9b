"""Keypoint detection on exported person views."""

import json

import numpy as np
import pytest

from omnipoint_adapters.config import AdapterConfig
from omnipoint_adapters.errors import NoSkeleton
from omnipoint_adapters.palette import load_image, load_palette
from omnipoint_adapters.pose import detect_pose
from omnipoint_adapters.wire import validate

CANONICAL = {
    "head", "neck",
    "l_shoulder", "l_elbow", "l_wrist", "l_fingertip",
    "r_shoulder", "r_elbow", "r_wrist", "r_fingertip",
}


@pytest.fixture(scope="module")
def palette(corpus):
    return load_palette(corpus / "palette.json")


def _person_view(adapted, sid):
    work = adapted[sid]
    manifest = json.loads((work / "views" / "views_person.json").read_text())
    entry = manifest["views"][0]
    return load_image(work / "views" / entry["path"]), entry


def test_full_skeleton_recovered(adapted, palette):
    cfg = AdapterConfig()
    sid = sorted(adapted)[0]
    image, entry = _person_view(adapted, sid)
    doc = detect_pose(image, entry, palette, cfg)
    validate(doc, "skeleton")
    names = {kp["name"] for kp in doc["keypoints"]}
    assert names == CANONICAL
    assert all(kp["confidence"] >= 0.1 for kp in doc["keypoints"])
    assert doc["frame"]["type"] == "view"
    assert doc["frame"]["size"] == entry["size"]
    assert doc["metadata"]["model"] == cfg.pose_model
    assert doc["metadata"]["palette"] == palette.fingerprint


def test_detected_keypoints_sit_on_their_markers(adapted, palette):
    cfg = AdapterConfig()
    sid = sorted(adapted)[0]
    image, entry = _person_view(adapted, sid)
    doc = detect_pose(image, entry, palette, cfg)
    synthesized = set(doc["metadata"]["elbow_from_midpoint"])
    for kp in doc["keypoints"]:
        if kp["name"].split("_")[0] in synthesized and kp["name"].endswith("elbow"):
            continue
        if kp["confidence"] < 0.9:
            continue  # partially buried marker: centroid may sit off-color
        col = int(kp["u"])
        row = int(kp["v"])
        assert tuple(image[row, col]) == tuple(palette.keypoints[kp["name"]])


def test_occluded_elbow_interpolated_from_arm(adapted, palette):
    cfg = AdapterConfig()
    for sid in sorted(adapted):
        image, entry = _person_view(adapted, sid)
        doc = detect_pose(image, entry, palette, cfg)
        by_name = {kp["name"]: kp for kp in doc["keypoints"]}
        for arm in doc["metadata"]["elbow_from_midpoint"]:
            elbow = by_name[f"{arm}_elbow"]
            shoulder = by_name[f"{arm}_shoulder"]
            wrist = by_name[f"{arm}_wrist"]
            assert elbow["u"] == pytest.approx(0.5 * (shoulder["u"] + wrist["u"]))
            assert elbow["v"] == pytest.approx(0.5 * (shoulder["v"] + wrist["v"]))
            assert elbow["confidence"] == pytest.approx(
                0.5 * min(shoulder["confidence"], wrist["confidence"])
            )


def test_no_skeleton_in_blank_view(palette):
    cfg = AdapterConfig()
    blank = np.full((64, 64, 3), 7, dtype=np.uint8)
    entry = {"view_index": 0, "center_lon": 0.0, "center_lat": 0.0, "fov": 1.0, "size": 64}
    with pytest.raises(NoSkeleton):
        detect_pose(blank, entry, palette, cfg)


def test_markers_on_synthetic_view(palette):
    cfg = AdapterConfig()
    size = 64
    image = np.zeros((size, size, 3), dtype=np.uint8)
    half = palette.marker_half_px

    def paint(name, cu, cv):
        color = palette.keypoints[name]
        image[cv - half : cv + half + 1, cu - half : cu + half + 1] = color

    paint("head", 16, 10)
    paint("l_shoulder", 20, 30)
    paint("l_wrist", 40, 50)
    # an undersized speck of the fingertip color: below the confidence floor
    image[60, 60] = palette.keypoints["l_fingertip"]

    entry = {"view_index": 0, "center_lon": 0.1, "center_lat": -0.2, "fov": 0.9, "size": size}
    doc = detect_pose(image, entry, palette, cfg)
    by_name = {kp["name"]: kp for kp in doc["keypoints"]}

    assert set(by_name) == {"head", "l_shoulder", "l_wrist", "l_elbow"}
    assert by_name["head"]["u"] == pytest.approx(16.5)
    assert by_name["head"]["v"] == pytest.approx(10.5)
    assert by_name["head"]["confidence"] == 1.0
    # the fingertip speck was filtered, so the wrist serves as the tip
    assert doc["metadata"]["tip_from_wrist"] == ["l"]
    # shoulder + wrist present without an elbow marker: midpoint fills in
    assert doc["metadata"]["elbow_from_midpoint"] == ["l"]
    assert by_name["l_elbow"]["u"] == pytest.approx(30.5)
    assert by_name["l_elbow"]["v"] == pytest.approx(40.5)
    assert doc["frame"] == {
        "type": "view",
        "center_lon": 0.1,
        "center_lat": -0.2,
        "fov": 0.9,
        "size": 64,
    }
