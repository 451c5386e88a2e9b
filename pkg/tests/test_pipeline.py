"""End-to-end orchestration: modes, matching, training, evaluation."""

from __future__ import annotations

import shutil

import numpy as np
import pytest

from omnipoint.config import PipelineConfig
from omnipoint.errors import (
    EmptyCorpus,
    InvalidParams,
    MissingFixture,
    NoPositives,
)
from omnipoint.fixtures import (
    GroundTruth,
    dump_json,
    dumps_json,
    load_json,
    load_scene,
    model_to_dict,
    validate,
)
from omnipoint.pipeline import (
    PROJECTION_MODES,
    SELECTORS,
    ModeFlags,
    default_mode_grid,
    estimate,
    evaluate,
    format_report_table,
    match_gt,
    result_to_dict,
    train_model,
)
from omnipoint.projection import LonLatRect, SphericalFootprint
from omnipoint.scan import Candidate
from omnipoint.select import Standardizer, SvmModel
from omnipoint.sphere import SphereDir


# ---------------------------------------------------------------------------
# mode flags and grids


def test_mode_flags_defaults_and_key():
    modes = ModeFlags()
    assert modes.projection_skeleton is True
    assert modes.projection_detection is True
    assert modes.selector == "distance"
    assert modes.key == "ps1_pd1_distance"
    assert ModeFlags(False, False, "svc").key == "ps0_pd0_svc"


def test_mode_flags_rejects_unknown_selector():
    with pytest.raises(InvalidParams):
        ModeFlags(selector="nearest")


def test_default_mode_grid_order():
    grid = default_mode_grid()
    assert len(grid) == 6
    assert [m.selector for m in grid] == ["distance"] * 3 + ["svc"] * 3
    assert [(m.projection_skeleton, m.projection_detection) for m in grid] == list(PROJECTION_MODES) * 2
    assert SELECTORS == ("distance", "svc")


# ---------------------------------------------------------------------------
# match_gt


def _cand_with_rect(cid: int, rect: LonLatRect, category="chair") -> Candidate:
    d = SphereDir(1.0, 0.0, 0.0)
    fp = SphericalFootprint((d, SphereDir(0.9, 0.1, 0.0), SphereDir(0.9, 0.0, 0.1)), d, 0.01, rect)
    return Candidate(cid, category, d, fp, 0.5, (0,))


def test_match_gt_identical_rect():
    rect = LonLatRect(0.0, 0.5, 0.0, 0.25)
    gt = GroundTruth("chair", rect)
    assert match_gt([_cand_with_rect(0, rect)], gt, PipelineConfig()) == 0


def test_match_gt_one_third_iou_rejected():
    gt = GroundTruth("chair", LonLatRect(1.0, 3.0, 0.0, 1.0))
    cand = _cand_with_rect(0, LonLatRect(0.0, 2.0, 0.0, 1.0))  # IoU exactly 1/3
    assert match_gt([cand], gt, PipelineConfig()) is None


def test_match_gt_category_must_match():
    rect = LonLatRect(0.0, 0.5, 0.0, 0.25)
    gt = GroundTruth("chair", rect)
    assert match_gt([_cand_with_rect(0, rect, category="cup")], gt, PipelineConfig()) is None


def test_match_gt_takes_highest_iou():
    gt = GroundTruth("chair", LonLatRect(0.0, 1.0, 0.0, 1.0))
    near = _cand_with_rect(0, LonLatRect(0.1, 1.1, 0.0, 1.0))   # high IoU
    exact = _cand_with_rect(1, LonLatRect(0.0, 1.0, 0.0, 1.0))  # IoU 1
    assert match_gt([near, exact], gt, PipelineConfig()) == 1


def test_match_gt_tie_keeps_lowest_id():
    rect = LonLatRect(0.0, 1.0, 0.0, 1.0)
    gt = GroundTruth("chair", rect)
    cands = [_cand_with_rect(2, rect), _cand_with_rect(1, rect)]
    assert match_gt(cands, gt, PipelineConfig()) == 1


def test_match_gt_threshold_is_inclusive():
    # IoU exactly 0.5: [0,2] vs [1,3] on lon with identical lat gives 1/3; use
    # [0,2] vs [0,1] instead: inter 1, union 2 -> 0.5 >= threshold.
    gt = GroundTruth("chair", LonLatRect(0.0, 2.0, 0.0, 1.0))
    cand = _cand_with_rect(0, LonLatRect(0.0, 1.0, 0.0, 1.0))
    assert match_gt([cand], gt, PipelineConfig()) == 0


# ---------------------------------------------------------------------------
# estimate on synthetic scenes


def _manual_distance_like_model() -> SvmModel:
    return SvmModel(
        weights=(-1.0, 0.0, 0.0, 0.0, 0.0),
        bias=0.0,
        standardizer=Standardizer.identity(5),
        freq_table={},
        metadata={},
    )


def test_estimate_correct_across_projection_modes(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[0])
    for ps, pd in PROJECTION_MODES:
        res = estimate(scene, cfg, ModeFlags(ps, pd, "distance"))
        assert res.correct is True, f"mode ps={ps} pd={pd}"
        assert res.top1 == res.matched_candidate
        assert res.ranking.ids[0] == res.top1


def test_estimate_svc_needs_model(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[0])
    with pytest.raises(InvalidParams, match=scene.scene_id):
        estimate(scene, cfg, ModeFlags(True, True, "svc"), model=None)


def test_estimate_svc_with_negative_distance_weight_matches_distance(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[1])
    dist = estimate(scene, cfg, ModeFlags(True, True, "distance"))
    svc = estimate(scene, cfg, ModeFlags(True, True, "svc"), model=_manual_distance_like_model())
    assert svc.ranking.ids == dist.ranking.ids
    assert svc.correct is True


def test_estimate_missing_fixture_names_scene(small_corpus, cfg, tmp_path):
    src = small_corpus.scene_paths[0].parent
    dst = tmp_path / src.name
    shutil.copytree(src, dst)
    doc = load_json(dst / "manifest.json")
    del doc["skeletons"]["equirect"]
    dump_json(dst / "manifest.json", doc)
    scene = load_scene(dst / "manifest.json")
    with pytest.raises(MissingFixture, match=f"scene {scene.scene_id}:"):
        estimate(scene, cfg, ModeFlags(False, False, "distance"))


def test_estimate_without_gt_reports_none(small_corpus, cfg, tmp_path):
    src = small_corpus.scene_paths[0].parent
    dst = tmp_path / src.name
    shutil.copytree(src, dst)
    doc = load_json(dst / "manifest.json")
    del doc["ground_truth"]
    dump_json(dst / "manifest.json", doc)
    scene = load_scene(dst / "manifest.json")
    res = estimate(scene, cfg, ModeFlags(True, True, "distance"))
    assert res.matched_candidate is None
    assert res.correct is None
    assert res.top1 is not None


# ---------------------------------------------------------------------------
# result documents


def test_result_to_dict_schema_and_determinism(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[2])
    res1 = estimate(scene, cfg, ModeFlags(True, True, "distance"))
    res2 = estimate(scene, cfg, ModeFlags(True, True, "distance"))
    doc1, doc2 = result_to_dict(res1), result_to_dict(res2)
    validate(doc1, "result")
    assert dumps_json(doc1) == dumps_json(doc2)
    ranks = [c["rank"] for c in doc1["candidates"]]
    assert ranks == list(range(1, len(ranks) + 1))
    for cand in doc1["candidates"]:
        assert set(cand["features"]) == {
            "circle_dist", "category_freq", "confidence", "area", "horiz_dist"
        }
    assert doc1["matched_candidate"] == res1.matched_candidate
    assert doc1["modes"] == {
        "projection_skeleton": True, "projection_detection": True, "selector": "distance"
    }


def test_result_scores_descend(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[3])
    doc = result_to_dict(estimate(scene, cfg, ModeFlags(True, True, "distance")))
    scores = [c["score"] for c in doc["candidates"]]
    assert scores == sorted(scores, reverse=True)


# ---------------------------------------------------------------------------
# feature frequency scope


def test_distance_mode_uses_per_image_frequencies(small_corpus, cfg):
    scene = load_scene(small_corpus.scene_paths[4])
    res = estimate(scene, cfg, ModeFlags(True, True, "distance"))
    counts = {}
    for cand in res.candidates:
        counts[cand.category] = counts.get(cand.category, 0) + 1
    total = len(res.candidates)
    for cand in res.candidates:
        assert cand.features.category_freq == pytest.approx(counts[cand.category] / total)


def test_svc_mode_uses_model_corpus_frequencies(small_corpus, cfg):
    outcome = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(True, True, "distance"))
    scene = load_scene(small_corpus.scene_paths[5])
    res = estimate(scene, cfg, ModeFlags(True, True, "svc"), model=outcome.model)
    for cand in res.candidates:
        expect = outcome.model.freq_table.get(cand.category, 0.0)
        assert cand.features.category_freq == pytest.approx(expect)


def test_image_scope_overrides_model_frequencies(small_corpus, cfg):
    img_cfg = cfg.replace(freq_scope="image")
    outcome = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(True, True, "distance"))
    scene = load_scene(small_corpus.scene_paths[5])
    res = estimate(scene, img_cfg, ModeFlags(True, True, "svc"), model=outcome.model)
    counts = {}
    for cand in res.candidates:
        counts[cand.category] = counts.get(cand.category, 0) + 1
    for cand in res.candidates:
        assert cand.features.category_freq == pytest.approx(counts[cand.category] / len(res.candidates))


# ---------------------------------------------------------------------------
# training


def test_train_model_on_corpus(small_corpus, cfg):
    outcome = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(True, True, "distance"), seed=7)
    assert len(outcome.used_scenes) + len(outcome.skipped_scenes) == len(small_corpus.scene_paths)
    assert len(outcome.used_scenes) >= 1
    assert outcome.n_positive == len(outcome.used_scenes)
    assert outcome.n_samples >= outcome.n_positive
    model = outcome.model
    assert sum(model.freq_table.values()) == pytest.approx(1.0)
    assert all(np.isfinite(model.weights))
    md = model.metadata
    assert md["projection_skeleton"] is True
    assert md["projection_detection"] is True
    assert md["used_scenes"] == len(outcome.used_scenes)
    assert md["positives"] == outcome.n_positive
    assert md["skipped_scenes"] == sorted(outcome.skipped_scenes)
    assert md["seed"] == 7


def test_train_model_retrain_byte_identical(small_corpus, cfg):
    a = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(True, True, "distance"), seed=7)
    b = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(True, True, "distance"), seed=7)
    assert dumps_json(model_to_dict(a.model)) == dumps_json(model_to_dict(b.model))


def _poison_gt(corpus, tmp_path, mutate):
    paths = []
    for src_manifest in corpus.scene_paths:
        src = src_manifest.parent
        dst = tmp_path / src.name
        shutil.copytree(src, dst)
        doc = load_json(dst / "manifest.json")
        mutate(doc)
        dump_json(dst / "manifest.json", doc)
        paths.append(dst / "manifest.json")
    return paths


def test_train_model_no_positives(small_corpus, cfg, tmp_path):
    def impossible_category(doc):
        doc["ground_truth"]["category"] = "no-such-category"

    paths = _poison_gt(small_corpus, tmp_path, impossible_category)
    with pytest.raises(NoPositives):
        train_model(paths, cfg, ModeFlags(True, True, "distance"))


def test_train_model_requires_gt(small_corpus, cfg, tmp_path):
    def drop_gt(doc):
        doc.pop("ground_truth", None)

    paths = _poison_gt(small_corpus, tmp_path, drop_gt)
    with pytest.raises(MissingFixture):
        train_model(paths[:1], cfg, ModeFlags(True, True, "distance"))


def test_train_model_skips_unmatched_scene(small_corpus, cfg, tmp_path):
    # Poison a single scene's ground truth; it must be skipped, not fatal.
    src = small_corpus.scene_paths[0].parent
    dst = tmp_path / src.name
    shutil.copytree(src, dst)
    doc = load_json(dst / "manifest.json")
    doc["ground_truth"]["category"] = "no-such-category"
    dump_json(dst / "manifest.json", doc)
    paths = [dst / "manifest.json"] + list(small_corpus.scene_paths[1:])
    outcome = train_model(paths, cfg, ModeFlags(True, True, "distance"))
    assert outcome.skipped_scenes == [load_scene(paths[0]).scene_id]
    assert len(outcome.used_scenes) == len(paths) - 1


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_accuracy_matches_recount(small_corpus, cfg):
    mode_list = [ModeFlags(ps, pd, "distance") for ps, pd in PROJECTION_MODES]
    report, results = evaluate(list(small_corpus.scene_paths), cfg, mode_list)
    validate(report, "report")
    assert len(report["cells"]) == 3
    for cell in report["cells"]:
        recount = 0
        for row in report["per_scene"]:
            for c in row["cells"]:
                if (
                    c["projection_skeleton"] == cell["projection_skeleton"]
                    and c["projection_detection"] == cell["projection_detection"]
                    and c["selector"] == cell["selector"]
                ):
                    recount += int(c["correct"])
        assert cell["correct"] == recount
        assert cell["total"] == len(small_corpus.scene_paths)
        assert cell["accuracy"] == recount / cell["total"]
    scene_ids = [row["scene_id"] for row in report["per_scene"]]
    assert scene_ids == sorted(scene_ids)
    assert set(results) == set(scene_ids)
    for sid, docs in results.items():
        assert set(docs) == {m.key for m in mode_list}
        for doc in docs.values():
            validate(doc, "result")


def test_evaluate_clean_corpus_distance_accuracy_is_one(small_corpus, cfg):
    mode_list = [ModeFlags(True, True, "distance")]
    report, _ = evaluate(list(small_corpus.scene_paths), cfg, mode_list)
    assert report["cells"][0]["accuracy"] == 1.0


def test_evaluate_empty_corpus(cfg):
    with pytest.raises(EmptyCorpus):
        evaluate([], cfg)


def test_evaluate_svc_without_model(small_corpus, cfg):
    with pytest.raises(InvalidParams, match="no model supplied"):
        evaluate(list(small_corpus.scene_paths[:1]), cfg, [ModeFlags(True, True, "svc")])


def test_evaluate_full_grid_with_models(small_corpus, cfg):
    models = {}
    for ps, pd in PROJECTION_MODES:
        outcome = train_model(list(small_corpus.scene_paths), cfg, ModeFlags(ps, pd, "distance"))
        models[(ps, pd)] = outcome.model
    report, results = evaluate(list(small_corpus.scene_paths), cfg, None, models=models)
    assert len(report["cells"]) == 6
    keys = {(c["projection_skeleton"], c["projection_detection"], c["selector"]) for c in report["cells"]}
    assert keys == {(ps, pd, sel) for sel in SELECTORS for ps, pd in PROJECTION_MODES}
    table = format_report_table(report)
    assert "no projection" in table
    assert "skeleton proj" in table
    assert "skeleton+det proj" in table
    assert "distance" in table and "svc" in table
    lines = table.splitlines()
    assert len(lines) == 3  # header + one row per selector


def test_evaluate_thread_count_does_not_change_output(small_corpus, cfg):
    mode_list = [ModeFlags(ps, pd, "distance") for ps, pd in PROJECTION_MODES]
    r1, d1 = evaluate(list(small_corpus.scene_paths), cfg, mode_list, jobs=1)
    r4, d4 = evaluate(list(small_corpus.scene_paths), cfg, mode_list, jobs=4)
    assert dumps_json(r1) == dumps_json(r4)
    assert set(d1) == set(d4)
    for sid in d1:
        for key in d1[sid]:
            assert dumps_json(d1[sid][key]) == dumps_json(d4[sid][key])


def test_evaluate_requires_gt(small_corpus, cfg, tmp_path):
    src = small_corpus.scene_paths[0].parent
    dst = tmp_path / src.name
    shutil.copytree(src, dst)
    doc = load_json(dst / "manifest.json")
    del doc["ground_truth"]
    dump_json(dst / "manifest.json", doc)
    with pytest.raises(MissingFixture, match="no ground truth"):
        evaluate([dst / "manifest.json"], cfg, [ModeFlags(True, True, "distance")])
