"""Command line interface for the detector adapters.

Each subcommand reads files produced by the pointing-estimation CLI,
runs one detector backend, and writes fixture JSON that the estimation
CLI accepts back. The two packages share only this wire format.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import AdapterConfig
from .errors import AdapterError, MissingInput
from .objects import detect_objects
from .palette import find_palette, load_image, load_palette
from .person import detect_person
from .pose import detect_pose
from .wire import dump_json, load_json, validate


def _load_config(args: argparse.Namespace) -> AdapterConfig:
    if args.config is not None:
        return AdapterConfig.from_json(Path(args.config))
    return AdapterConfig()


def _resolve_palette(in_dir: Path, cfg: AdapterConfig, args: argparse.Namespace):
    explicit = args.palette if args.palette is not None else cfg.palette_path
    path = find_palette(in_dir, Path(explicit) if explicit is not None else None)
    return load_palette(path)


def _views_manifest(in_dir: Path, name: str, stage: str) -> dict:
    manifest = load_json(in_dir / name)
    validate(manifest, "views_manifest")
    if manifest["stage"] != stage:
        raise MissingInput(
            f"{in_dir / name} is a {manifest['stage']!r}-stage manifest; this command needs {stage!r}"
        )
    return manifest


def cmd_person(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    manifest = load_json(in_dir / "manifest.json")
    validate(manifest, "scene")
    image_rel = manifest["image"].get("path")
    if not image_rel:
        raise MissingInput(
            f"scene {manifest['id']} has no rendered image; regenerate the corpus with images"
        )
    palette = _resolve_palette(in_dir, cfg, args)
    image = load_image(in_dir / image_rel)
    doc = detect_person(image, palette, cfg)
    validate(doc, "person_box")
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_json(out_dir / "person_box.json", doc)
    print(f"wrote {out_dir / 'person_box.json'}")
    return 0


def cmd_pose(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    manifest = _views_manifest(in_dir, "views_person.json", "person")
    views = sorted(manifest["views"], key=lambda entry: entry["view_index"])
    if not views:
        raise MissingInput(f"{in_dir / 'views_person.json'} lists no views")
    entry = views[0]
    palette = _resolve_palette(in_dir, cfg, args)
    image = load_image(in_dir / entry["path"])
    doc = detect_pose(image, entry, palette, cfg)
    validate(doc, "skeleton")
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_json(out_dir / "skeleton_view.json", doc)
    print(f"wrote {out_dir / 'skeleton_view.json'} ({len(doc['keypoints'])} keypoints)")
    return 0


def cmd_objects(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    manifest = _views_manifest(in_dir, "views_scan.json", "scan")
    palette = _resolve_palette(in_dir, cfg, args)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = 0
    for entry in sorted(manifest["views"], key=lambda e: e["view_index"]):
        image = load_image(in_dir / entry["path"])
        doc = detect_objects(image, entry, palette, cfg)
        validate(doc, "detections")
        path = out_dir / f"det_view_{entry['view_index']:02d}.json"
        dump_json(path, doc)
        total += len(doc["detections"])
    print(f"wrote {len(manifest['views'])} detection fixtures ({total} detections)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapt",
        description="Run detector backends over exported scene images and views.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--in", dest="in_dir", required=True, help="input directory")
        p.add_argument("--out", required=True, help="output directory for fixture JSON")
        p.add_argument("--config", default=None, help="adapter config JSON file")
        p.add_argument("--palette", default=None, help="explicit palette file path")

    p_person = sub.add_parser("person", help="detect the person box in a scene image")
    common(p_person)
    p_person.set_defaults(func=cmd_person)

    p_pose = sub.add_parser("pose", help="detect skeleton keypoints in the person view")
    common(p_pose)
    p_pose.set_defaults(func=cmd_pose)

    p_objects = sub.add_parser("objects", help="detect objects in every scan view")
    common(p_objects)
    p_objects.set_defaults(func=cmd_objects)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
