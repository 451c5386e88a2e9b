"""End-to-end orchestration: per-scene estimation, training, and evaluation.

The ablation switches only change which fixture stream (and therefore which
coordinate frame) feeds the pipeline; the geometry and the selectors are
shared by every mode.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .config import PipelineConfig
from .errors import EmptyCorpus, InvalidParams, MissingFixture, NoPositives, PipelineError
from .fixtures import (
    SCHEMA_VERSION,
    GroundTruth,
    SceneInputs,
    load_scene,
    rect_to_dict,
)
from .gesture import pointing_circle, select_pointing_arm, user_lonlat_from_bbox
from .projection import footprint_from_equirect_bbox, wrapped_rect_iou
from .scan import Candidate, Detection, build_candidates, compute_features, scan_views
from .select import (
    Ranking,
    SvmModel,
    build_freq_table,
    fit_standardizer,
    rank_by_distance,
    rank_by_svc,
    train_svc,
)
from .sphere import DirectedPointing, LonLat, dir_to_lonlat

SELECTORS = ("distance", "svc")

# The three fixture-frame combinations reported by the evaluation grid:
# nothing projected, skeleton only, and skeleton plus detections.
PROJECTION_MODES: tuple[tuple[bool, bool], ...] = ((False, False), (True, False), (True, True))


@dataclass(frozen=True)
class ModeFlags:
    """Ablation switches: fixture frame per stream plus the selector."""

    projection_skeleton: bool = True
    projection_detection: bool = True
    selector: str = "distance"

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise InvalidParams(f"selector must be one of {SELECTORS}, got {self.selector!r}")

    @property
    def key(self) -> str:
        return f"ps{int(self.projection_skeleton)}_pd{int(self.projection_detection)}_{self.selector}"


def default_mode_grid() -> list[ModeFlags]:
    """The full 2-selector x 3-projection-mode evaluation grid."""
    return [
        ModeFlags(ps, pd, selector)
        for selector in SELECTORS
        for ps, pd in PROJECTION_MODES
    ]


@dataclass
class SceneResult:
    scene_id: str
    modes: ModeFlags
    user: LonLat
    pointing: DirectedPointing
    candidates: list[Candidate]
    ranking: Ranking
    matched_candidate: Optional[int]
    has_gt: bool

    @property
    def top1(self) -> Optional[int]:
        return self.ranking.top1()

    @property
    def correct(self) -> Optional[bool]:
        if not self.has_gt:
            return None
        return self.matched_candidate is not None and self.top1 == self.matched_candidate


def _scene_error(scene_id: str, exc: PipelineError) -> PipelineError:
    return type(exc)(f"scene {scene_id}: {exc}")


def _skeleton_for(scene: SceneInputs, modes: ModeFlags):
    if modes.projection_skeleton:
        if scene.skeleton_view is None:
            raise MissingFixture("perspective-frame skeleton fixture missing")
        return scene.skeleton_view
    if scene.skeleton_equirect is None:
        raise MissingFixture("equirect-frame skeleton fixture missing")
    return scene.skeleton_equirect


def _detections_for(scene: SceneInputs, modes: ModeFlags) -> list[Detection]:
    if modes.projection_detection:
        if scene.detections_perspective is None:
            raise MissingFixture("perspective detection fixtures missing")
        return scene.detections_perspective
    if scene.detections_equirect is None:
        raise MissingFixture("equirect detection fixture missing")
    return scene.detections_equirect


@dataclass
class _SceneGeometry:
    """Everything estimate computes before the selector runs."""

    user: LonLat
    pointing: DirectedPointing
    candidates: list[Candidate]


def _scene_geometry(scene: SceneInputs, cfg: PipelineConfig, modes: ModeFlags) -> _SceneGeometry:
    user = user_lonlat_from_bbox(scene.grid, scene.person_box)
    skeleton = _skeleton_for(scene, modes)
    arm = select_pointing_arm(skeleton, cfg)
    dp = pointing_circle(skeleton, arm, cfg.kp_min)
    views = scan_views(dp, cfg)
    detections = _detections_for(scene, modes)
    box = scene.person_box
    user_rect = footprint_from_equirect_bbox(
        scene.grid, (box.u_min, box.v_min, box.u_max, box.v_max)
    ).lonlat_rect
    candidates = build_candidates(detections, views, scene.grid, cfg, user_rect=user_rect)
    return _SceneGeometry(user=user, pointing=dp, candidates=candidates)


def _freq_for(candidates: Sequence[Candidate], cfg: PipelineConfig, model: Optional[SvmModel]) -> dict:
    if model is not None and cfg.freq_scope == "corpus":
        return model.freq_table
    if not candidates:
        return {}
    return build_freq_table([c.category for c in candidates])


def match_gt(candidates: Sequence[Candidate], gt: GroundTruth, cfg: PipelineConfig) -> Optional[int]:
    """Candidate id with the highest overlap against ground truth.

    A match needs category equality and rect IoU at or above the threshold;
    ties keep the lowest id.
    """
    best_id: Optional[int] = None
    best_iou = 0.0
    for cand in sorted(candidates, key=lambda c: c.id):
        if cand.category != gt.category:
            continue
        iou = wrapped_rect_iou(cand.footprint.lonlat_rect, gt.rect)
        if iou >= cfg.gt_iou and iou > best_iou:
            best_id, best_iou = cand.id, iou
    return best_id


def estimate(
    scene: SceneInputs,
    cfg: PipelineConfig,
    modes: ModeFlags = ModeFlags(),
    model: Optional[SvmModel] = None,
) -> SceneResult:
    """Run gesture -> scan -> select for one scene and rank its candidates."""
    if modes.selector == "svc" and model is None:
        raise InvalidParams(f"scene {scene.scene_id}: svc selector needs a trained model")
    try:
        geo = _scene_geometry(scene, cfg, modes)
        freq = _freq_for(geo.candidates, cfg, model)
        candidates = compute_features(geo.candidates, geo.pointing, geo.user, freq, cfg, grid=scene.grid)
        if modes.selector == "distance":
            ranking = rank_by_distance(candidates)
        else:
            ranking = rank_by_svc(model, candidates)
        matched = match_gt(candidates, scene.gt, cfg) if scene.gt is not None else None
    except PipelineError as exc:
        raise _scene_error(scene.scene_id, exc) from exc
    return SceneResult(
        scene_id=scene.scene_id,
        modes=modes,
        user=geo.user,
        pointing=geo.pointing,
        candidates=candidates,
        ranking=ranking,
        matched_candidate=matched,
        has_gt=scene.gt is not None,
    )


def result_to_dict(res: SceneResult) -> dict:
    by_id = {c.id: c for c in res.candidates}
    cands = []
    for rank, entry in enumerate(res.ranking.entries, start=1):
        cand = by_id[entry.candidate_id]
        center = dir_to_lonlat(cand.center)
        cands.append(
            {
                "rank": rank,
                "id": cand.id,
                "category": cand.category,
                "score": entry.score,
                "confidence": cand.confidence,
                "center": {"lon": center.lon, "lat": center.lat},
                "lonlat_rect": rect_to_dict(cand.footprint.lonlat_rect),
                "features": cand.features.to_dict(),
                "source_views": list(cand.source_views),
            }
        )
    dp = res.pointing
    return {
        "schema_version": SCHEMA_VERSION,
        "scene_id": res.scene_id,
        "modes": {
            "projection_skeleton": res.modes.projection_skeleton,
            "projection_detection": res.modes.projection_detection,
            "selector": res.modes.selector,
        },
        "user": {"lon": res.user.lon, "lat": res.user.lat},
        "pointing": {
            "normal": [dp.circle.normal.x, dp.circle.normal.y, dp.circle.normal.z],
            "anchor": [dp.anchor.x, dp.anchor.y, dp.anchor.z],
            "tangent": [dp.tangent.x, dp.tangent.y, dp.tangent.z],
        },
        "candidates": cands,
        "matched_candidate": res.matched_candidate,
    }


@dataclass
class TrainOutcome:
    model: SvmModel
    used_scenes: list[str]
    skipped_scenes: list[str]
    n_samples: int
    n_positive: int


def train_model(
    scene_paths: Sequence,
    cfg: PipelineConfig,
    modes: ModeFlags = ModeFlags(),
    c: float = 1.0,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 100_000,
) -> TrainOutcome:
    """Train the learned selector over a corpus of scenes.

    Pass one runs the geometry per scene and records which candidate matches
    ground truth; scenes without a match are skipped and reported. The corpus
    frequency table is built over every candidate of the used scenes, then the
    feature matrix is assembled (matched candidate positive, the rest of the
    scene negative), standardized, and fed to the solver.
    """
    prepared = []
    skipped: list[str] = []
    for path in scene_paths:
        scene = load_scene(path)
        if scene.gt is None:
            raise MissingFixture(f"scene {scene.scene_id}: training scene has no ground truth")
        try:
            geo = _scene_geometry(scene, cfg, modes)
        except PipelineError as exc:
            raise _scene_error(scene.scene_id, exc) from exc
        matched = match_gt(geo.candidates, scene.gt, cfg)
        if matched is None:
            skipped.append(scene.scene_id)
            continue
        prepared.append((scene, geo, matched))
    if not prepared:
        raise NoPositives("no training scene has a candidate matching ground truth")

    corpus_categories = [c_.category for _, geo, _ in prepared for c_ in geo.candidates]
    freq_table = build_freq_table(corpus_categories)

    rows = []
    labels = []
    n_positive = 0
    for scene, geo, matched in prepared:
        table = freq_table if cfg.freq_scope == "corpus" else build_freq_table(
            [c_.category for c_ in geo.candidates]
        )
        cands = compute_features(geo.candidates, geo.pointing, geo.user, table, cfg, grid=scene.grid)
        for cand in cands:
            rows.append(cand.features.as_array())
            if cand.id == matched:
                labels.append(1.0)
                n_positive += 1
            else:
                labels.append(-1.0)
    x = np.vstack(rows)
    y = np.asarray(labels, dtype=np.float64)
    standardizer = fit_standardizer(x)
    z = standardizer.transform(x)
    model = train_svc(
        z, y, c=c, seed=seed, tol=tol, max_iter=max_iter,
        standardizer=standardizer, freq_table=freq_table,
    )
    metadata = dict(model.metadata)
    metadata.update(
        {
            "projection_skeleton": modes.projection_skeleton,
            "projection_detection": modes.projection_detection,
            "used_scenes": len(prepared),
            "skipped_scenes": sorted(skipped),
            "positives": n_positive,
        }
    )
    model = SvmModel(
        weights=model.weights,
        bias=model.bias,
        standardizer=model.standardizer,
        freq_table=model.freq_table,
        metadata=metadata,
    )
    return TrainOutcome(
        model=model,
        used_scenes=[scene.scene_id for scene, _, _ in prepared],
        skipped_scenes=sorted(skipped),
        n_samples=len(labels),
        n_positive=n_positive,
    )


def _evaluate_one(
    path,
    cfg: PipelineConfig,
    mode_list: Sequence[ModeFlags],
    models: Mapping[tuple[bool, bool], SvmModel],
) -> tuple[str, list[dict], dict[str, dict]]:
    scene = load_scene(path)
    if scene.gt is None:
        raise MissingFixture(f"scene {scene.scene_id}: evaluation scene has no ground truth")
    cells = []
    docs: dict[str, dict] = {}
    for modes in mode_list:
        model = None
        if modes.selector == "svc":
            key = (modes.projection_skeleton, modes.projection_detection)
            model = models.get(key)
            if model is None:
                raise InvalidParams(
                    f"scene {scene.scene_id}: no model supplied for mode {modes.key}"
                )
        res = estimate(scene, cfg, modes, model)
        cells.append(
            {
                "projection_skeleton": modes.projection_skeleton,
                "projection_detection": modes.projection_detection,
                "selector": modes.selector,
                "top1": res.top1,
                "matched": res.matched_candidate,
                "correct": bool(res.correct),
            }
        )
        docs[modes.key] = result_to_dict(res)
    return scene.scene_id, cells, docs


def evaluate(
    scene_paths: Sequence,
    cfg: PipelineConfig,
    mode_list: Optional[Sequence[ModeFlags]] = None,
    models: Optional[Mapping[tuple[bool, bool], SvmModel]] = None,
    jobs: int = 1,
) -> tuple[dict, dict[str, dict[str, dict]]]:
    """Accuracy over a corpus for each requested mode combination.

    Returns the report dict plus every per-scene result document keyed by
    scene id and mode. Scenes are independent, so the worker count never
    changes the output; assembly is ordered by scene id.
    """
    if not scene_paths:
        raise EmptyCorpus("no scenes to evaluate")
    mode_list = list(mode_list) if mode_list is not None else default_mode_grid()
    models = dict(models) if models is not None else {}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda p: _evaluate_one(p, cfg, mode_list, models), scene_paths))
    else:
        rows = [_evaluate_one(p, cfg, mode_list, models) for p in scene_paths]
    rows.sort(key=lambda r: r[0])

    cells = []
    for modes in mode_list:
        correct = 0
        for _, scene_cells, _ in rows:
            for cell in scene_cells:
                if (
                    cell["projection_skeleton"] == modes.projection_skeleton
                    and cell["projection_detection"] == modes.projection_detection
                    and cell["selector"] == modes.selector
                ):
                    correct += int(cell["correct"])
        total = len(rows)
        cells.append(
            {
                "projection_skeleton": modes.projection_skeleton,
                "projection_detection": modes.projection_detection,
                "selector": modes.selector,
                "correct": correct,
                "total": total,
                "accuracy": correct / total,
            }
        )
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "cells": cells,
        "per_scene": [
            {"scene_id": sid, "cells": scene_cells} for sid, scene_cells, _ in rows
        ],
    }
    results = {sid: docs for sid, _, docs in rows}
    return report, results


def format_report_table(report: dict) -> str:
    """Fixed-width text table: selectors as rows, projection modes as columns."""
    headers = {
        (False, False): "no projection",
        (True, False): "skeleton proj",
        (True, True): "skeleton+det proj",
    }
    cols = [headers.get(mode, f"ps={mode[0]} pd={mode[1]}") for mode in PROJECTION_MODES]
    by_key = {
        (c["projection_skeleton"], c["projection_detection"], c["selector"]): c
        for c in report["cells"]
    }
    lines = ["top-1 accuracy".ljust(16) + "".join(col.rjust(20) for col in cols)]
    for selector in SELECTORS:
        row = [selector.ljust(16)]
        for mode in PROJECTION_MODES:
            cell = by_key.get((mode[0], mode[1], selector))
            row.append(("-" if cell is None else f"{cell['accuracy']:.4f} ({cell['correct']}/{cell['total']})").rjust(20))
        lines.append("".join(row))
    return "\n".join(lines)
