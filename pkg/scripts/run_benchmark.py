#!/usr/bin/env python3
"""Synthesize corpora, train the learned selector, and print the full grid.

Reproduces the core experiment end to end on synthetic scenes:

1. generate a training corpus and a held-out test corpus,
2. train one linear SVM per skeleton/detection projection mode,
3. evaluate both selectors in all three projection modes,
4. print the accuracy table and write the JSON report.

Example:
    python3 scripts/run_benchmark.py --out /tmp/bench --kind confuser \
        --train-scenes 60 --test-scenes 40 --jobs 4
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from omnipoint.config import PipelineConfig
from omnipoint.fixtures import dump_json, load_dataset, save_model
from omnipoint.pipeline import (
    PROJECTION_MODES,
    ModeFlags,
    evaluate,
    format_report_table,
    train_model,
)
from omnipoint.synth import corpus_params, synth_corpus


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, required=True, help="working directory for corpora and outputs")
    parser.add_argument("--kind", default="confuser", choices=["clean", "distractors", "confuser"],
                        help="scene family to benchmark on")
    parser.add_argument("--train-scenes", type=int, default=60)
    parser.add_argument("--test-scenes", type=int, default=40)
    parser.add_argument("--seed", type=int, default=7000, help="base seed for scene generation")
    parser.add_argument("--noise-px", type=float, default=0.0, help="keypoint jitter in pixels")
    parser.add_argument("--c", type=float, default=1.0, help="hinge penalty weight for training")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for evaluation")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    cfg = PipelineConfig()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    train_manifest = synth_corpus(
        out / "train",
        corpus_params(args.kind, args.train_scenes, base_seed=args.seed, noise_px=args.noise_px),
        cfg,
    )
    test_manifest = synth_corpus(
        out / "test",
        corpus_params(args.kind, args.test_scenes, base_seed=args.seed + 100_000, noise_px=args.noise_px),
        cfg,
    )
    train_paths, _ = load_dataset(train_manifest)
    test_paths, _ = load_dataset(test_manifest)
    print(f"corpora: {len(train_paths)} train / {len(test_paths)} test ({args.kind})")

    models = {}
    for ps, pd in PROJECTION_MODES:
        outcome = train_model(
            train_paths, cfg, ModeFlags(ps, pd, "svc"), c=args.c, seed=args.seed
        )
        models[(ps, pd)] = outcome.model
        model_path = out / f"svc_ps{int(ps)}_pd{int(pd)}.json"
        save_model(model_path, outcome.model)
        print(
            f"trained ps={int(ps)} pd={int(pd)}: {outcome.n_samples} candidates "
            f"({outcome.n_positive} positive), weights {[round(w, 3) for w in outcome.model.weights]}"
        )

    mode_list = [ModeFlags(ps, pd, sel) for sel in ("distance", "svc") for ps, pd in PROJECTION_MODES]
    report, _ = evaluate(test_paths, cfg, mode_list, models, jobs=args.jobs)
    dump_json(out / "report.json", report)
    print()
    print(format_report_table(report))
    print(f"\nreport -> {out / 'report.json'}  ({time.perf_counter() - t0:.1f}s total)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
