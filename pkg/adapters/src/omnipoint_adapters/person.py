"""Person detection over the equirectangular image."""

from __future__ import annotations

import numpy as np

from .config import AdapterConfig
from .errors import NoPersonFound
from .palette import Palette, color_mask, mask_bbox
from .wire import WIRE_VERSION


def detect_person(image: np.ndarray, palette: Palette, cfg: AdapterConfig) -> dict:
    """Find the person figure and return a person-box fixture document.

    Scenes hold a single person, so the box spans every person-colored
    pixel (figure outline plus limbs). Confidence compares the pixel mass
    against the minimum a real figure outline produces; a stray fleck of
    matching color stays below the threshold and is rejected.
    """
    mask = color_mask(image, palette.person)
    found = mask_bbox(mask)
    if found is None:
        raise NoPersonFound("no person-colored pixels in the image")
    u0, v0, u1, v1, pixels = found
    # A 2 px outline alone contributes roughly 4*(w+h) pixels.
    expected = 4.0 * ((u1 - u0) + (v1 - v0))
    confidence = min(1.0, pixels / expected)
    if confidence < cfg.person_threshold:
        raise NoPersonFound(
            f"best person box confidence {confidence:.3f} below threshold {cfg.person_threshold}"
        )
    return {
        "schema_version": WIRE_VERSION,
        "person_box": {
            "u_min": u0,
            "v_min": v0,
            "u_max": u1,
            "v_max": v1,
            "confidence": confidence,
        },
        "metadata": {
            "model": cfg.person_model,
            "palette": palette.fingerprint,
        },
    }
