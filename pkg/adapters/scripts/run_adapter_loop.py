#!/usr/bin/env python3
"""Drive the full detector-adapter loop against the estimation CLI.

For each scene in a freshly rendered synthetic corpus:

1. `adapt person`   detects the person box in the equirectangular image,
2. `omnipoint render-views --stage person` exports the person view,
3. `adapt pose`     recovers skeleton keypoints from that view,
4. `omnipoint render-views --stage scan` exports views along the pointing ray,
5. `adapt objects`  detects objects in every scan view,
6. an assembled manifest feeds `omnipoint estimate`.

Both packages are exercised strictly through their command lines and the
JSON/PNG files they exchange.

Example:
    python3 scripts/run_adapter_loop.py --out /tmp/adapter-demo --scenes 3
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path


def run(*args: str) -> subprocess.CompletedProcess:
    proc = subprocess.run(list(args), capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"command failed: {' '.join(args)}")
    return proc


def primary(*args: str) -> subprocess.CompletedProcess:
    return run(sys.executable, "-m", "omnipoint", *args)


def adapter(*args: str) -> subprocess.CompletedProcess:
    return run(sys.executable, "-m", "omnipoint_adapters", *args)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, required=True, help="working directory")
    parser.add_argument("--scenes", type=int, default=3)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--kind", default="clean", choices=["clean", "distractors", "confuser"])
    args = parser.parse_args(argv)

    corpus = args.out / "corpus"
    primary(
        "synth", "--out", str(corpus), "--num-scenes", str(args.scenes),
        "--kind", args.kind, "--seed", str(args.seed), "--render-images",
    )
    palette = corpus / "palette.json"
    scene_dirs = sorted(p.parent for p in corpus.glob("scene-*/manifest.json"))
    print(f"rendered {len(scene_dirs)} scenes under {corpus}")

    correct = 0
    for scene_dir in scene_dirs:
        sid = scene_dir.name
        work = args.out / "work" / sid
        work.mkdir(parents=True, exist_ok=True)

        adapter("person", "--in", str(scene_dir), "--out", str(work))
        primary(
            "render-views", "--scene", str(scene_dir / "manifest.json"),
            "--out", str(work / "views"), "--stage", "person",
            "--person-box", str(work / "person_box.json"),
        )
        adapter("pose", "--in", str(work / "views"), "--out", str(work), "--palette", str(palette))
        primary(
            "render-views", "--scene", str(scene_dir / "manifest.json"),
            "--out", str(work / "views"), "--stage", "scan",
            "--person-box", str(work / "person_box.json"),
            "--skeleton", str(work / "skeleton_view.json"),
        )
        adapter("objects", "--in", str(work / "views"), "--out", str(work / "det"), "--palette", str(palette))

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

        primary("estimate", "--scene", str(work / "manifest.json"), "--out", str(work / "result.json"))
        result = json.loads((work / "result.json").read_text())
        top = result["candidates"][0] if result["candidates"] else None
        gt = orig["ground_truth"]["category"]
        hit = top is not None and top["category"] == gt
        correct += int(hit)
        mark = "ok " if hit else "MISS"
        print(f"  [{mark}] {sid}: top-1 {top['category'] if top else '-'} vs ground truth {gt}")

    print(f"top-1 correct on {correct}/{len(scene_dirs)} scenes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
