"""Versioned JSON fixture formats and their (de)serialization.

Every file carries a schema_version field. Angles are radians; floats are
serialized with Python's shortest round-trip repr, which preserves the full
double value. All paths inside a scene manifest are relative to the manifest
file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import MissingFixture
from .gesture import Keypoint, PersonBox, Skeleton
from .projection import EquirectGrid, LonLatRect, ViewSpec
from .scan import Detection
from .select import Standardizer, SvmModel
from .sphere import LonLat

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3}
_BBOX = {"type": "array", "items": _NUMBER, "minItems": 4, "maxItems": 4}

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

_RECT = {
    "type": "object",
    "required": ["lon_min", "lon_max", "lat_min", "lat_max"],
    "properties": {k: _NUMBER for k in ("lon_min", "lon_max", "lat_min", "lat_max")},
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
            "schema_version": {"const": SCHEMA_VERSION},
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
            "schema_version": {"const": SCHEMA_VERSION},
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
            "schema_version": {"const": SCHEMA_VERSION},
            "person_box": _PERSON_BOX,
            "metadata": {"type": "object"},
        },
    },
    "scene": {
        "type": "object",
        "required": ["schema_version", "id", "image", "person_box"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
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
            "ground_truth": {
                "type": "object",
                "required": ["category", "lonlat_rect"],
                "properties": {"category": {"type": "string"}, "lonlat_rect": _RECT},
            },
            "metadata": {"type": "object"},
        },
    },
    "dataset": {
        "type": "object",
        "required": ["schema_version", "scenes"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "scenes": {"type": "array", "items": {"type": "string"}},
            "split": {
                "type": "object",
                "properties": {
                    "train": {"type": "array", "items": {"type": "string"}},
                    "test": {"type": "array", "items": {"type": "string"}},
                },
            },
            "metadata": {"type": "object"},
        },
    },
    "model": {
        "type": "object",
        "required": ["schema_version", "weights", "bias", "means", "stds", "freq_table", "metadata"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "weights": {"type": "array", "items": _NUMBER},
            "bias": _NUMBER,
            "means": {"type": "array", "items": _NUMBER},
            "stds": {"type": "array", "items": _NUMBER},
            "freq_table": {"type": "object", "additionalProperties": _NUMBER},
            "metadata": {"type": "object"},
        },
    },
    "result": {
        "type": "object",
        "required": ["schema_version", "scene_id", "modes", "candidates", "matched_candidate"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "scene_id": {"type": "string"},
            "modes": {
                "type": "object",
                "required": ["projection_skeleton", "projection_detection", "selector"],
                "properties": {
                    "projection_skeleton": {"type": "boolean"},
                    "projection_detection": {"type": "boolean"},
                    "selector": {"enum": ["distance", "svc"]},
                },
            },
            "user": {"type": "object", "properties": {"lon": _NUMBER, "lat": _NUMBER}},
            "pointing": {
                "type": "object",
                "properties": {"normal": _VEC3, "anchor": _VEC3, "tangent": _VEC3},
            },
            "candidates": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["rank", "id", "category", "score", "lonlat_rect", "features"],
                    "properties": {
                        "rank": {"type": "integer", "minimum": 1},
                        "id": {"type": "integer", "minimum": 0},
                        "category": {"type": "string"},
                        "score": _NUMBER,
                        "confidence": _NUMBER,
                        "center": {"type": "object", "properties": {"lon": _NUMBER, "lat": _NUMBER}},
                        "lonlat_rect": _RECT,
                        "features": {"type": "object", "additionalProperties": _NUMBER},
                        "source_views": {"type": "array", "items": {"type": "integer"}},
                    },
                },
            },
            "matched_candidate": {"type": ["integer", "null"]},
        },
    },
    "report": {
        "type": "object",
        "required": ["schema_version", "cells", "per_scene"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "config": {"type": "object"},
            "cells": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["projection_skeleton", "projection_detection", "selector", "correct", "total", "accuracy"],
                    "properties": {
                        "projection_skeleton": {"type": "boolean"},
                        "projection_detection": {"type": "boolean"},
                        "selector": {"enum": ["distance", "svc"]},
                        "correct": {"type": "integer", "minimum": 0},
                        "total": {"type": "integer", "minimum": 0},
                        "accuracy": _NUMBER,
                    },
                },
            },
            "per_scene": {"type": "array", "items": {"type": "object"}},
        },
    },
    "views_manifest": {
        "type": "object",
        "required": ["schema_version", "scene_id", "stage", "views"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
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
}


def validate(obj: dict, schema_name: str) -> None:
    """Validate a fixture dict against one of the named schemas."""
    try:
        jsonschema.validate(obj, SCHEMAS[schema_name])
    except jsonschema.ValidationError as exc:
        raise MissingFixture(f"document does not match the {schema_name} schema: {exc.message}") from exc


def dump_json(path, obj: dict) -> None:
    """Write deterministic JSON: sorted keys, two-space indent, trailing newline."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def dumps_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path) -> dict:
    try:
        with open(Path(path), "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise MissingFixture(f"fixture file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise MissingFixture(f"fixture file is not valid JSON: {path} ({exc})") from exc


def frame_to_dict(frame) -> dict:
    if isinstance(frame, ViewSpec):
        return {
            "type": "view",
            "center_lon": frame.center.lon,
            "center_lat": frame.center.lat,
            "fov": frame.fov,
            "size": frame.size,
        }
    return {"type": "equirect", "width": frame.width, "height": frame.height}


def frame_from_dict(d: dict):
    if d["type"] == "view":
        return ViewSpec(LonLat(d["center_lon"], d["center_lat"]), d["fov"], int(d["size"]))
    return EquirectGrid(int(d["width"]), int(d["height"]))


def skeleton_to_dict(s: Skeleton, metadata: Optional[dict] = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "frame": frame_to_dict(s.frame),
        "keypoints": [
            {"name": name, "u": kp.u, "v": kp.v, "confidence": kp.confidence}
            for name, kp in sorted(s.keypoints.items())
        ],
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def skeleton_from_dict(d: dict) -> Skeleton:
    validate(d, "skeleton")
    kps = {e["name"]: Keypoint(float(e["u"]), float(e["v"]), float(e["confidence"])) for e in d["keypoints"]}
    return Skeleton(kps, frame_from_dict(d["frame"]))


def detections_to_dict(dets: list[Detection], view_index: Optional[int], metadata: Optional[dict] = None) -> dict:
    doc: dict = {"schema_version": SCHEMA_VERSION}
    if view_index is None:
        doc["frame"] = "equirect"
    else:
        doc["view_index"] = view_index
    doc["detections"] = [
        {"category": det.category, "bbox": list(det.bbox), "confidence": det.confidence} for det in dets
    ]
    if metadata:
        doc["metadata"] = metadata
    return doc


def detections_from_dict(d: dict) -> list[Detection]:
    validate(d, "detections")
    view_index = d.get("view_index")
    return [
        Detection(
            category=e["category"],
            bbox=tuple(float(x) for x in e["bbox"]),
            confidence=float(e["confidence"]),
            view_index=view_index,
        )
        for e in d["detections"]
    ]


def person_box_to_dict(box: PersonBox) -> dict:
    return {
        "u_min": box.u_min,
        "v_min": box.v_min,
        "u_max": box.u_max,
        "v_max": box.v_max,
        "confidence": box.confidence,
    }


def person_box_from_dict(d: dict) -> PersonBox:
    return PersonBox(
        float(d["u_min"]), float(d["v_min"]), float(d["u_max"]), float(d["v_max"]),
        float(d.get("confidence", 1.0)),
    )


def rect_to_dict(rect: LonLatRect) -> dict:
    return {
        "lon_min": rect.lon_min,
        "lon_max": rect.lon_max,
        "lat_min": rect.lat_min,
        "lat_max": rect.lat_max,
    }


def rect_from_dict(d: dict) -> LonLatRect:
    return LonLatRect(float(d["lon_min"]), float(d["lon_max"]), float(d["lat_min"]), float(d["lat_max"]))


def model_to_dict(model: SvmModel) -> dict:
    metadata = dict(model.metadata)
    metadata["constant_columns"] = list(model.standardizer.constant_columns)
    return {
        "schema_version": SCHEMA_VERSION,
        "weights": list(model.weights),
        "bias": model.bias,
        "means": list(model.standardizer.means),
        "stds": list(model.standardizer.stds),
        "freq_table": {k: model.freq_table[k] for k in sorted(model.freq_table)},
        "metadata": metadata,
    }


def model_from_dict(d: dict) -> SvmModel:
    validate(d, "model")
    metadata = dict(d["metadata"])
    constant = metadata.pop("constant_columns", [False] * len(d["means"]))
    std = Standardizer(
        tuple(float(m) for m in d["means"]),
        tuple(float(s) for s in d["stds"]),
        tuple(bool(c) for c in constant),
    )
    return SvmModel(
        weights=tuple(float(w) for w in d["weights"]),
        bias=float(d["bias"]),
        standardizer=std,
        freq_table={k: float(v) for k, v in d["freq_table"].items()},
        metadata=metadata,
    )


def save_model(path, model: SvmModel) -> None:
    dump_json(path, model_to_dict(model))


def load_model(path) -> SvmModel:
    return model_from_dict(load_json(path))


@dataclass(frozen=True)
class GroundTruth:
    category: str
    rect: LonLatRect


@dataclass
class SceneInputs:
    """One scene's fixtures, loaded into memory."""

    scene_id: str
    grid: EquirectGrid
    image_path: Optional[Path]
    person_box: PersonBox
    skeleton_view: Optional[Skeleton] = None
    skeleton_equirect: Optional[Skeleton] = None
    detections_perspective: Optional[list[Detection]] = None
    detections_equirect: Optional[list[Detection]] = None
    gt: Optional[GroundTruth] = None


def load_scene(manifest_path) -> SceneInputs:
    """Load a scene manifest and every fixture it references."""
    manifest_path = Path(manifest_path)
    doc = load_json(manifest_path)
    validate(doc, "scene")
    base = manifest_path.parent
    grid = EquirectGrid(int(doc["image"]["width"]), int(doc["image"]["height"]))
    image_path = doc["image"].get("path")
    inputs = SceneInputs(
        scene_id=doc["id"],
        grid=grid,
        image_path=(base / image_path) if image_path else None,
        person_box=person_box_from_dict(doc["person_box"]),
    )
    skeletons = doc.get("skeletons", {})
    if "view" in skeletons:
        inputs.skeleton_view = skeleton_from_dict(load_json(base / skeletons["view"]))
    if "equirect" in skeletons:
        inputs.skeleton_equirect = skeleton_from_dict(load_json(base / skeletons["equirect"]))
    detections = doc.get("detections", {})
    if "perspective" in detections:
        dets: list[Detection] = []
        for rel in detections["perspective"]:
            file_dets = detections_from_dict(load_json(base / rel))
            if any(det.view_index is None for det in file_dets):
                raise MissingFixture(f"scene {doc['id']}: perspective fixture {rel} lacks a view_index")
            dets.extend(file_dets)
        dets.sort(key=lambda det: (det.view_index, det.bbox, det.category))
        inputs.detections_perspective = dets
    if "equirect" in detections:
        eq = detections_from_dict(load_json(base / detections["equirect"]))
        if any(det.view_index is not None for det in eq):
            raise MissingFixture(f"scene {doc['id']}: equirect fixture carries a view_index")
        inputs.detections_equirect = eq
    if "ground_truth" in doc:
        gt = doc["ground_truth"]
        inputs.gt = GroundTruth(gt["category"], rect_from_dict(gt["lonlat_rect"]))
    return inputs


def load_dataset(manifest_path) -> tuple[list[Path], dict]:
    """Scene manifest paths plus the split map from a dataset manifest."""
    manifest_path = Path(manifest_path)
    doc = load_json(manifest_path)
    validate(doc, "dataset")
    base = manifest_path.parent
    paths = [base / rel for rel in doc["scenes"]]
    return paths, doc.get("split", {})
