"""Pose estimation over one perspective view."""

from __future__ import annotations

import numpy as np

from .config import AdapterConfig
from .errors import NoSkeleton
from .palette import Palette, blobs_of, color_mask
from .wire import WIRE_VERSION

ARM_PREFIXES = ("l", "r")


def detect_pose(image: np.ndarray, view_entry: dict, palette: Palette, cfg: AdapterConfig) -> dict:
    """Recover canonical keypoints from a view and return a skeleton fixture.

    Each keypoint's marker color is matched and the largest blob's centroid
    becomes the keypoint position; confidence is the blob's pixel mass
    relative to a full marker, so clipped markers score lower. Joints whose
    markers are buried under overlapping ones are reconstructed from their
    neighbors: a missing elbow is interpolated halfway along the
    shoulder-wrist segment at reduced confidence. Arms whose fingertip
    marker is not visible fall back to the wrist as the pointing tip
    downstream; both completions are recorded in the fixture metadata.
    """
    keypoints = []
    found_names = set()
    for name in sorted(palette.keypoints):
        mask = color_mask(image, palette.keypoints[name])
        blobs = blobs_of(mask, cfg.min_blob_px)
        if not blobs:
            continue
        best = blobs[0]
        marker_area = float((2 * palette.marker_half_px + 1) ** 2)
        confidence = min(1.0, best.pixels / marker_area)
        if confidence < cfg.keypoint_threshold:
            continue
        keypoints.append(
            {
                "name": name,
                "u": best.centroid_u,
                "v": best.centroid_v,
                "confidence": confidence,
            }
        )
        found_names.add(name)
    if not keypoints:
        raise NoSkeleton("no keypoint markers found in the view")

    by_name = {kp["name"]: kp for kp in keypoints}
    elbow_from_midpoint = []
    for arm in ARM_PREFIXES:
        if f"{arm}_elbow" in found_names:
            continue
        shoulder = by_name.get(f"{arm}_shoulder")
        wrist = by_name.get(f"{arm}_wrist")
        if shoulder is None or wrist is None:
            continue
        keypoints.append(
            {
                "name": f"{arm}_elbow",
                "u": 0.5 * (shoulder["u"] + wrist["u"]),
                "v": 0.5 * (shoulder["v"] + wrist["v"]),
                "confidence": 0.5 * min(shoulder["confidence"], wrist["confidence"]),
            }
        )
        elbow_from_midpoint.append(arm)
    keypoints.sort(key=lambda kp: kp["name"])

    tip_from_wrist = [
        arm
        for arm in ARM_PREFIXES
        if f"{arm}_fingertip" not in found_names and f"{arm}_wrist" in found_names
    ]
    return {
        "schema_version": WIRE_VERSION,
        "frame": {
            "type": "view",
            "center_lon": view_entry["center_lon"],
            "center_lat": view_entry["center_lat"],
            "fov": view_entry["fov"],
            "size": view_entry["size"],
        },
        "keypoints": keypoints,
        "metadata": {
            "model": cfg.pose_model,
            "palette": palette.fingerprint,
            "elbow_from_midpoint": elbow_from_midpoint,
            "tip_from_wrist": tip_from_wrist,
        },
    }
