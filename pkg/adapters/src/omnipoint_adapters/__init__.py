"""Detector adapters for the omnipoint pipeline.

Each adapter runs a detector backend over PNG images and writes fixture
files in the pipeline's versioned JSON wire format. The packages share
only that wire format (schemas, file layouts, and the pipeline CLI) —
there is no code dependency in either direction.

The bundled backend is a deterministic marker-color detector: it
recovers person boxes, body keypoints, and object boxes from scenes
rendered with a known color palette. Real model backends plug in behind
the same config surface.
"""

__all__ = ["__version__"]

__version__ = "0.1.0"
