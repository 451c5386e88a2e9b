"""Command-line interface: estimate, train, evaluate, annotate, synth, render-views."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .annotate import annotation_boxes_from_result, draw_annotation
from .config import AREA_UNITS, FREQ_SCOPES, STEPPING_MODES, PipelineConfig
from .errors import InvalidParams, MissingFixture, PipelineError
from .fixtures import (
    SCHEMA_VERSION,
    dump_json,
    load_dataset,
    load_json,
    load_model,
    load_scene,
    person_box_from_dict,
    save_model,
    skeleton_from_dict,
    validate,
)
from .gesture import pointing_circle, select_pointing_arm, person_view_spec
from .pipeline import (
    PROJECTION_MODES,
    SELECTORS,
    ModeFlags,
    estimate,
    evaluate,
    format_report_table,
    result_to_dict,
    train_model,
)
from .projection import EquirectGrid, load_png, render_view, save_png
from .scan import scan_views
from .sphere import GreatCircle, DirectedPointing, SphereDir
from .synth import SynthParams, corpus_params, synth_corpus

_CONFIG_FIELDS = (
    "step_deg", "fov_deg", "view_size", "num_views", "dedup_iou",
    "extended_deg", "kp_min", "gt_iou", "stepping", "area_unit", "freq_scope",
    "person_margin", "person_fov_min_deg", "person_fov_max_deg",
)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline settings")
    g.add_argument("--config", type=Path, help="JSON file with pipeline settings")
    g.add_argument("--step-deg", type=float)
    g.add_argument("--fov-deg", type=float)
    g.add_argument("--view-size", type=int)
    g.add_argument("--num-views", type=int)
    g.add_argument("--dedup-iou", type=float)
    g.add_argument("--extended-deg", type=float)
    g.add_argument("--kp-min", type=float)
    g.add_argument("--gt-iou", type=float)
    g.add_argument("--stepping", choices=STEPPING_MODES)
    g.add_argument("--area-unit", choices=AREA_UNITS)
    g.add_argument("--freq-scope", choices=FREQ_SCOPES)
    g.add_argument("--person-margin", type=float)
    g.add_argument("--person-fov-min-deg", type=float)
    g.add_argument("--person-fov-max-deg", type=float)


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.replace(**overrides) if overrides else cfg


def _add_mode_flags(p: argparse.ArgumentParser, selector: bool = True) -> None:
    g = p.add_argument_group("ablation modes")
    g.add_argument("--projection-skeleton", choices=("on", "off"), default="on",
                   help="lift skeleton keypoints from the person perspective view (on) or from the equirect frame (off)")
    g.add_argument("--projection-detection", choices=("on", "off"), default="on",
                   help="consume per-view detections (on) or whole-equirect detections (off)")
    if selector:
        g.add_argument("--selector", choices=SELECTORS, default="distance")


def _modes_from_args(args: argparse.Namespace, selector: Optional[str] = None) -> ModeFlags:
    return ModeFlags(
        projection_skeleton=args.projection_skeleton == "on",
        projection_detection=args.projection_detection == "on",
        selector=selector if selector is not None else getattr(args, "selector", "distance"),
    )


def _dataset_paths(dataset_path: Path, split_name: Optional[str]) -> list[Path]:
    paths, split = load_dataset(dataset_path)
    if not split_name:
        return paths
    if split_name not in split:
        raise MissingFixture(f"dataset {dataset_path} has no '{split_name}' split")
    wanted = set(split[split_name])
    out = []
    for p in paths:
        if load_json(p).get("id") in wanted:
            out.append(p)
    return out


def _cmd_estimate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    modes = _modes_from_args(args)
    model = load_model(args.model) if args.model else None
    scene = load_scene(args.scene)
    res = estimate(scene, cfg, modes, model)
    doc = result_to_dict(res)
    validate(doc, "result")
    dump_json(args.out, doc)
    if res.ranking.entries:
        top = doc["candidates"][0]
        print(f"{res.scene_id}: top-1 {top['category']} (candidate {top['id']}, score {top['score']:.6g})")
    else:
        print(f"{res.scene_id}: no candidates")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    modes = _modes_from_args(args, selector="svc")
    paths = _dataset_paths(args.dataset, args.split)
    outcome = train_model(
        paths, cfg, modes, c=args.c, seed=args.seed, tol=args.tol, max_iter=args.max_iter
    )
    save_model(args.out, outcome.model)
    meta = outcome.model.metadata
    print(
        f"trained on {len(outcome.used_scenes)} scenes "
        f"({outcome.n_samples} candidates, {outcome.n_positive} positive); "
        f"skipped {len(outcome.skipped_scenes)}; "
        f"objective {meta['objective']:.6g}, gap {meta['duality_gap']:.3g}, "
        f"iterations {meta['iterations']}"
    )
    print(f"weights: {[round(w, 6) for w in outcome.model.weights]}  bias: {outcome.model.bias:.6f}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    paths = _dataset_paths(args.dataset, args.split)
    selectors = args.selectors
    mode_list = [ModeFlags(ps, pd, sel) for sel in selectors for ps, pd in PROJECTION_MODES]
    models = {}
    if "svc" in selectors:
        if args.model:
            m = load_model(args.model)
            for ps, pd in PROJECTION_MODES:
                models[(ps, pd)] = m
        elif args.models_dir:
            for ps, pd in PROJECTION_MODES:
                mp = Path(args.models_dir) / f"svc_ps{int(ps)}_pd{int(pd)}.json"
                if not mp.exists():
                    raise MissingFixture(f"model file missing for mode ps={ps} pd={pd}: {mp}")
                models[(ps, pd)] = load_model(mp)
        else:
            raise InvalidParams("svc selector requested: pass --model or --models-dir")
    report, results = evaluate(paths, cfg, mode_list, models, jobs=args.jobs)
    validate(report, "report")
    dump_json(args.out, report)
    if args.results_dir:
        results_dir = Path(args.results_dir)
        results_dir.mkdir(parents=True, exist_ok=True)
        for sid in sorted(results):
            for key in sorted(results[sid]):
                dump_json(results_dir / f"{sid}__{key}.json", results[sid][key])
    print(format_report_table(report))
    return 0


def _cmd_annotate(args: argparse.Namespace) -> int:
    manifest = load_json(args.scene)
    validate(manifest, "scene")
    image_rel = manifest["image"].get("path")
    if not image_rel:
        raise MissingFixture(f"scene {manifest['id']} has no image to annotate")
    image = load_png(Path(args.scene).parent / image_rel)
    grid = EquirectGrid(manifest["image"]["width"], manifest["image"]["height"])
    result_doc = load_json(args.result)
    validate(result_doc, "result")
    p = result_doc["pointing"]
    dp = DirectedPointing(
        GreatCircle(SphereDir(*p["normal"])),
        SphereDir(*p["anchor"]),
        SphereDir(*p["tangent"]),
    )
    out = draw_annotation(image, grid, dp, annotation_boxes_from_result(result_doc), top_k=args.top_k)
    save_png(args.out, out)
    print(f"annotated {manifest['id']} -> {args.out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    params = corpus_params(
        args.kind,
        args.num_scenes,
        base_seed=args.seed,
        noise_px=args.noise_px,
        num_distractors=args.distractors,
        render_images=args.render_images,
    )
    manifest = synth_corpus(args.out, params, cfg, train_count=args.train_count)
    print(f"wrote {args.num_scenes} scenes -> {manifest}")
    return 0


def _render_stage(out_dir: Path, scene_id: str, stage: str, specs, image, prefix: str) -> None:
    views = []
    for i, vs in enumerate(specs):
        name = f"{prefix}_{i:02d}.png"
        save_png(out_dir / name, render_view(image, vs))
        views.append(
            {
                "view_index": i,
                "center_lon": vs.center.lon,
                "center_lat": vs.center.lat,
                "fov": vs.fov,
                "size": vs.size,
                "path": name,
            }
        )
    doc = {"schema_version": SCHEMA_VERSION, "scene_id": scene_id, "stage": stage, "views": views}
    validate(doc, "views_manifest")
    dump_json(out_dir / f"views_{stage}.json", doc)


def _cmd_render_views(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    manifest = load_json(args.scene)
    validate(manifest, "scene")
    image_rel = manifest["image"].get("path")
    if not image_rel:
        raise MissingFixture(f"scene {manifest['id']} has no image to render from")
    image = load_png(Path(args.scene).parent / image_rel)
    grid = EquirectGrid(manifest["image"]["width"], manifest["image"]["height"])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.person_box:
        pb_doc = load_json(args.person_box)
        validate(pb_doc, "person_box")
        person_box = person_box_from_dict(pb_doc["person_box"])
    else:
        person_box = person_box_from_dict(manifest["person_box"])
    if args.stage in ("person", "both"):
        vs = person_view_spec(grid, person_box, cfg)
        _render_stage(out_dir, manifest["id"], "person", [vs], image, "view_person")
        print(f"person view -> {out_dir / 'views_person.json'}")
    if args.stage in ("scan", "both"):
        scene_dir = Path(args.scene).parent
        if args.skeleton:
            skeleton = skeleton_from_dict(load_json(args.skeleton))
        else:
            skeletons = manifest.get("skeletons", {})
            rel = skeletons.get("view") or skeletons.get("equirect")
            if rel is None:
                raise MissingFixture(
                    f"scene {manifest['id']}: no skeleton fixture for the scan stage; pass --skeleton"
                )
            skeleton = skeleton_from_dict(load_json(scene_dir / rel))
        arm = select_pointing_arm(skeleton, cfg)
        dp = pointing_circle(skeleton, arm, cfg.kp_min)
        specs = scan_views(dp, cfg)
        _render_stage(out_dir, manifest["id"], "scan", specs, image, "view_scan")
        print(f"{len(specs)} scan views -> {out_dir / 'views_scan.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnipoint",
        description="Estimate which object a person points at in an equirectangular image.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="run the pipeline on one scene")
    p.add_argument("--scene", type=Path, required=True, help="scene manifest JSON")
    p.add_argument("--out", type=Path, required=True, help="result record path")
    p.add_argument("--model", type=Path, help="trained model (required for --selector svc)")
    _add_mode_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("train", help="train the learned selector on a dataset")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--split", help="dataset split name to train on (e.g. train)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--c", type=float, default=1.0, help="hinge penalty weight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100_000)
    _add_mode_flags(p, selector=False)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="top-1 accuracy grid over a dataset")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--split", help="dataset split name to evaluate (e.g. test)")
    p.add_argument("--out", type=Path, required=True, help="report path")
    p.add_argument("--results-dir", type=Path, help="also write per-scene result records here")
    p.add_argument("--selectors", nargs="+", choices=SELECTORS, default=list(SELECTORS))
    p.add_argument("--model", type=Path, help="one model used for every projection mode")
    p.add_argument("--models-dir", type=Path, help="directory with svc_ps{0|1}_pd{0|1}.json files")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("annotate", help="draw the pointing circle and ranked boxes")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--result", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--top-k", type=int, default=None)
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("synth", help="generate a synthetic scene corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--num-scenes", type=int, required=True)
    p.add_argument("--kind", choices=("clean", "distractors", "confuser"), default="clean")
    p.add_argument("--seed", type=int, default=0, help="seed of the first scene")
    p.add_argument("--noise-px", type=float, default=0.0)
    p.add_argument("--distractors", type=int, default=None, help="override the variant's distractor count")
    p.add_argument("--render-images", action="store_true")
    p.add_argument("--train-count", type=int, default=None, help="first N scenes become the train split")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("render-views", help="export perspective PNGs + view manifests")
    p.add_argument("--scene", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--stage", choices=("person", "scan", "both"), default="both")
    p.add_argument("--person-box", type=Path, help="person-box fixture overriding the manifest")
    p.add_argument("--skeleton", type=Path, help="skeleton fixture for the scan stage")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_render_views)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
