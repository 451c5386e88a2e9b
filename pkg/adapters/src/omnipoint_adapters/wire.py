"""The pipeline's JSON wire format, as consumed and produced by the adapters.

These schemas restate the pipeline's published fixture contracts (the
`schema_version: 1` wire format). The adapters validate every file they
read and every file they emit against them, so a drift between the two
packages surfaces as a hard validation error rather than silent data
corruption. Floats serialize through `repr`, i.e. shortest round-trip
form with up to 17 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import InvalidConfig, MissingInput

WIRE_VERSION = 1

_NUMBER = {"type": "number"}

_FRAME_VIEW = {
    "type": "object",
    "required": ["type", "center_lon", "center_lat", "fov", "size"],
    "properties": {
        "type": {"const": "view"},
        "center_lon": _NUMBER,
        "center_lat": _NUMBER,
        "fov": _NUMBER,
        "size": {"type": "integer", "minimum": 2},
    },
}

_FRAME_EQUIRECT = {
    "type": "object",
    "required": ["type", "width", "height"],
    "properties": {
        "type": {"const": "equirect"},
        "width": {"type": "integer", "minimum": 2},
        "height": {"type": "integer", "minimum": 1},
    },
}

_BBOX = {
    "type": "array",
    "items": _NUMBER,
    "minItems": 4,
    "maxItems": 4,
}

_PERSON_BOX = {
    "type": "object",
    "required": ["u_min", "v_min", "u_max", "v_max"],
    "properties": {
        "u_min": _NUMBER,
        "v_min": _NUMBER,
        "u_max": _NUMBER,
        "v_max": _NUMBER,
        "confidence": _NUMBER,
    },
}

_DETECTION = {
    "type": "object",
    "required": ["category", "bbox", "confidence"],
    "properties": {
        "category": {"type": "string", "minLength": 1},
        "bbox": _BBOX,
        "confidence": _NUMBER,
    },
}

SCHEMAS: dict[str, dict] = {
    "skeleton": {
        "type": "object",
        "required": ["schema_version", "frame", "keypoints"],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "frame": {"oneOf": [_FRAME_VIEW, _FRAME_EQUIRECT]},
            "keypoints": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "u", "v", "confidence"],
                    "properties": {
                        "name": {"type": "string"},
                        "u": _NUMBER,
                        "v": _NUMBER,
                        "confidence": _NUMBER,
                    },
                },
            },
            "metadata": {"type": "object"},
        },
    },
    "detections": {
        "type": "object",
        "required": ["schema_version", "detections"],
        "oneOf": [
            {"required": ["view_index"]},
            {"required": ["frame"]},
        ],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "view_index": {"type": "integer", "minimum": 0},
            "frame": {"const": "equirect"},
            "detections": {"type": "array", "items": _DETECTION},
            "metadata": {"type": "object"},
        },
    },
    "person_box": {
        "type": "object",
        "required": ["schema_version", "person_box"],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "person_box": _PERSON_BOX,
            "metadata": {"type": "object"},
        },
    },
    "scene": {
        "type": "object",
        "required": ["schema_version", "id", "image", "person_box"],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "id": {"type": "string", "minLength": 1},
            "image": {
                "type": "object",
                "required": ["width", "height"],
                "properties": {
                    "path": {"type": ["string", "null"]},
                    "width": {"type": "integer", "minimum": 2},
                    "height": {"type": "integer", "minimum": 1},
                },
            },
            "person_box": _PERSON_BOX,
            "skeletons": {
                "type": "object",
                "properties": {"view": {"type": "string"}, "equirect": {"type": "string"}},
            },
            "detections": {
                "type": "object",
                "properties": {
                    "perspective": {"type": "array", "items": {"type": "string"}},
                    "equirect": {"type": "string"},
                },
            },
            "ground_truth": {"type": "object"},
            "metadata": {"type": "object"},
        },
    },
    "views_manifest": {
        "type": "object",
        "required": ["schema_version", "scene_id", "stage", "views"],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "scene_id": {"type": "string"},
            "stage": {"enum": ["person", "scan"]},
            "views": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["view_index", "center_lon", "center_lat", "fov", "size", "path"],
                    "properties": {
                        "view_index": {"type": "integer", "minimum": 0},
                        "center_lon": _NUMBER,
                        "center_lat": _NUMBER,
                        "fov": _NUMBER,
                        "size": {"type": "integer", "minimum": 2},
                        "path": {"type": "string"},
                    },
                },
            },
        },
    },
    "palette": {
        "type": "object",
        "required": ["schema_version", "background", "person", "categories", "keypoints", "marker_half_px"],
        "properties": {
            "schema_version": {"const": WIRE_VERSION},
            "background": {"type": "array"},
            "person": {"type": "array"},
            "categories": {"type": "object"},
            "keypoints": {"type": "object"},
            "marker_half_px": {"type": "integer", "minimum": 1},
        },
    },
}


def validate(obj: dict, schema_name: str) -> None:
    """Validate a document against one of the wire schemas."""
    try:
        jsonschema.validate(obj, SCHEMAS[schema_name])
    except jsonschema.ValidationError as exc:
        raise InvalidConfig(f"document does not match the {schema_name} schema: {exc.message}") from exc


def load_json(path) -> dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise MissingInput(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise MissingInput(f"input file is not valid JSON: {path} ({exc})") from exc


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dump_json(path, doc: dict) -> None:
    Path(path).write_text(dumps_json(doc), encoding="utf-8")
