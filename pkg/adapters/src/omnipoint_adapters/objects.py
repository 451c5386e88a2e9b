"""Object detection over the exported perspective scan views."""

from __future__ import annotations

import math

import numpy as np

from .config import AdapterConfig
from .palette import Palette, blobs_of, color_mask
from .wire import WIRE_VERSION

# A fully visible rendered object is an ellipse, which fills pi/4 of its
# bounding box; the fill ratio against that ceiling grades blob quality.
ELLIPSE_FILL = math.pi / 4.0


def detect_objects(image: np.ndarray, view_entry: dict, palette: Palette, cfg: AdapterConfig) -> dict:
    """Detect category blobs in one view and return a detections fixture.

    Every category color is matched independently; each connected blob
    above the pixel floor becomes one detection whose confidence is its
    fill ratio relative to a full ellipse. Empty views produce an empty,
    still schema-valid fixture.
    """
    detections = []
    for category in sorted(palette.categories):
        mask = color_mask(image, palette.categories[category])
        for blob in blobs_of(mask, cfg.min_blob_px):
            confidence = min(1.0, blob.fill_ratio / ELLIPSE_FILL)
            if confidence < cfg.object_threshold:
                continue
            detections.append(
                {
                    "category": category,
                    "bbox": [blob.u0, blob.v0, blob.u1, blob.v1],
                    "confidence": confidence,
                }
            )
    detections.sort(key=lambda d: (d["category"], d["bbox"]))
    return {
        "schema_version": WIRE_VERSION,
        "view_index": int(view_entry["view_index"]),
        "detections": detections,
        "metadata": {
            "model": cfg.object_model,
            "palette": palette.fingerprint,
            "label_set": sorted(palette.categories),
        },
    }
