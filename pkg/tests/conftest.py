"""Shared fixtures: a small synthetic corpus and an in-process CLI runner."""

from __future__ import annotations

import contextlib
import io
from dataclasses import dataclass
from pathlib import Path

import pytest

from omnipoint.cli import main as cli_main
from omnipoint.config import PipelineConfig
from omnipoint.fixtures import load_dataset
from omnipoint.synth import SynthParams, corpus_params, synth_corpus


@pytest.fixture(scope="session")
def cfg() -> PipelineConfig:
    return PipelineConfig()


@dataclass(frozen=True)
class Corpus:
    dataset: Path
    scene_paths: tuple[Path, ...]
    split: dict


def _build_corpus(root: Path, params_list) -> Corpus:
    dataset = synth_corpus(root, params_list)
    paths, split = load_dataset(dataset)
    return Corpus(dataset=dataset, scene_paths=tuple(paths), split=split)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> Corpus:
    """Eight noiseless scenes with two distractors each; shared read-only."""
    root = tmp_path_factory.mktemp("corpus_small")
    params = corpus_params("clean", 8, base_seed=500, num_distractors=2)
    return _build_corpus(root, params)


@pytest.fixture(scope="session")
def confuser_corpus(tmp_path_factory) -> Corpus:
    """Twenty confuser scenes with a train/test split; shared read-only."""
    root = tmp_path_factory.mktemp("corpus_confuser")
    dataset = synth_corpus(root, corpus_params("confuser", 20, base_seed=900), train_count=10)
    paths, split = load_dataset(dataset)
    return Corpus(dataset=dataset, scene_paths=tuple(paths), split=split)


@pytest.fixture(scope="session")
def rendered_scene(tmp_path_factory) -> Path:
    """One scene written with its flat-color equirect image; returns the manifest path."""
    from omnipoint.synth import synth_scene, write_scene

    root = tmp_path_factory.mktemp("rendered_scene")
    scene = synth_scene(SynthParams(seed=77, num_distractors=2, render_image=True))
    return write_scene(scene, root)


@dataclass(frozen=True)
class CliResult:
    code: int
    out: str
    err: str


def run_cli(argv: list[str]) -> CliResult:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main([str(a) for a in argv])
    return CliResult(code=code, out=out.getvalue(), err=err.getvalue())


@pytest.fixture
def cli():
    return run_cli
