"""Shared fixtures: a rendered sample corpus plus the adapted outputs.

The corpus is generated through the estimation package's CLI and the
adapters run through their own CLI, so every test exercises the same
file-level boundary the two packages share in production.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from omnipoint_adapters.cli import main as adapt_main

SAMPLE_SEED = 42
SAMPLE_SCENES = 3


def run_primary(*args: str) -> subprocess.CompletedProcess:
    proc = subprocess.run(
        [sys.executable, "-m", "omnipoint", *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"omnipoint {' '.join(args)} failed:\n{proc.stderr}")
    return proc


def run_adapter(*args: str) -> int:
    return adapt_main(list(args))


@pytest.fixture(scope="session")
def corpus(tmp_path_factory) -> Path:
    """Three rendered scenes produced by the estimation CLI."""
    root = tmp_path_factory.mktemp("sample") / "corpus"
    run_primary(
        "synth",
        "--out", str(root),
        "--num-scenes", str(SAMPLE_SCENES),
        "--kind", "clean",
        "--seed", str(SAMPLE_SEED),
        "--render-images",
    )
    return root


@pytest.fixture(scope="session")
def scene_dirs(corpus) -> list[Path]:
    return sorted(p.parent for p in corpus.glob("scene-*/manifest.json"))


@pytest.fixture(scope="session")
def adapted(corpus, scene_dirs, tmp_path_factory) -> dict[str, Path]:
    """Full adapter loop over every sample scene, via both CLIs.

    Returns scene id -> work dir containing person_box.json,
    skeleton_view.json, det/det_view_*.json, views/, and the assembled
    manifest.json that points the estimation pipeline at those files.
    """
    work_root = tmp_path_factory.mktemp("adapted")
    palette = corpus / "palette.json"
    out: dict[str, Path] = {}
    for scene_dir in scene_dirs:
        sid = scene_dir.name
        work = work_root / sid
        work.mkdir()
        assert run_adapter("person", "--in", str(scene_dir), "--out", str(work)) == 0
        run_primary(
            "render-views",
            "--scene", str(scene_dir / "manifest.json"),
            "--out", str(work / "views"),
            "--stage", "person",
            "--person-box", str(work / "person_box.json"),
        )
        assert run_adapter(
            "pose", "--in", str(work / "views"), "--out", str(work), "--palette", str(palette)
        ) == 0
        run_primary(
            "render-views",
            "--scene", str(scene_dir / "manifest.json"),
            "--out", str(work / "views"),
            "--stage", "scan",
            "--person-box", str(work / "person_box.json"),
            "--skeleton", str(work / "skeleton_view.json"),
        )
        assert run_adapter(
            "objects", "--in", str(work / "views"), "--out", str(work / "det"), "--palette", str(palette)
        ) == 0

        orig = json.loads((scene_dir / "manifest.json").read_text())
        det_names = sorted(p.name for p in (work / "det").glob("det_view_*.json"))
        manifest = {
            "schema_version": 1,
            "id": orig["id"],
            "image": {
                "path": os.path.relpath(scene_dir / orig["image"]["path"], work),
                "width": orig["image"]["width"],
                "height": orig["image"]["height"],
            },
            "person_box": json.loads((work / "person_box.json").read_text())["person_box"],
            "skeletons": {"view": "skeleton_view.json"},
            "detections": {"perspective": [f"det/{name}" for name in det_names]},
            "ground_truth": orig["ground_truth"],
        }
        (work / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        out[sid] = work
    return out
