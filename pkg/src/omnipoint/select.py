"""Candidate ranking: distance rule and a from-scratch linear hinge-loss SVM.

The trainer minimizes 0.5*||w||^2 + C * sum(max(0, 1 - y*(w.x + b))) via
pairwise coordinate ascent on the dual (the bias term induces the equality
constraint sum(alpha*y) = 0, so variables move in most-violating pairs).
Everything is deterministic: fixed pair selection with first-index tie
breaks, no randomness anywhere, so retraining on identical inputs is
byte-identical.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyCorpus, NotConverged, SingleClass, TooFewSamples
from .scan import FEATURE_NAMES, Candidate, FeatureVector

# Columns with population std at or below this count as constant.
CONSTANT_STD_EPS = 1e-12


def build_freq_table(categories: Iterable[str]) -> dict[str, float]:
    """Relative frequency of each category over the training corpus."""
    counts = Counter(categories)
    total = sum(counts.values())
    if total == 0:
        raise EmptyCorpus("no detections to build a frequency table from")
    return {cat: counts[cat] / total for cat in sorted(counts)}


@dataclass(frozen=True)
class Standardizer:
    """Per-column shift/scale fitted on training features."""

    means: tuple[float, ...]
    stds: tuple[float, ...]
    constant_columns: tuple[bool, ...]

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Shift and scale; flagged constant columns map to zero outright."""
        x = np.asarray(x, dtype=np.float64)
        z = (x - np.array(self.means)) / np.array(self.stds)
        if any(self.constant_columns):
            z = np.where(np.array(self.constant_columns), 0.0, z)
        return z

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(tuple(0.0 for _ in range(dim)), tuple(1.0 for _ in range(dim)), tuple(False for _ in range(dim)))


def fit_standardizer(x: np.ndarray) -> Standardizer:
    """Population mean/std per column; constant columns get std 1 and a flag,
    so transforming the training data maps them to zero."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewSamples("standardizer needs a 2D matrix with at least two rows")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    constant = stds <= CONSTANT_STD_EPS * np.maximum(1.0, np.abs(means))
    stds = np.where(constant, 1.0, stds)
    return Standardizer(tuple(float(m) for m in means), tuple(float(s) for s in stds), tuple(bool(c) for c in constant))


@dataclass(frozen=True)
class SvmModel:
    """Trained linear scorer over standardized features."""

    weights: tuple[float, ...]
    bias: float
    standardizer: Standardizer
    freq_table: dict
    metadata: dict


@dataclass(frozen=True)
class RankEntry:
    candidate_id: int
    score: float


@dataclass(frozen=True)
class Ranking:
    entries: tuple[RankEntry, ...]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(e.candidate_id for e in self.entries)

    def top1(self) -> Optional[int]:
        return self.entries[0].candidate_id if self.entries else None


def _best_bias(scores: np.ndarray, y: np.ndarray, c: float) -> float:
    """Exact minimizer over b of the hinge term for fixed w.

    The sum of hinges is piecewise linear and convex in b with breakpoints at
    y_i - w.x_i, so the minimum sits on one of them; ties take the smallest b.
    """
    breaks = np.unique(y - scores)
    margins = 1.0 - y[None, :] * (scores[None, :] + breaks[:, None])
    totals = c * np.maximum(0.0, margins).sum(axis=1)
    return float(breaks[int(np.argmin(totals))])


def _primal_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, c: float) -> float:
    margins = 1.0 - y * (x @ w + b)
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, margins).sum())


def solve_hinge_svm(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 100_000,
) -> tuple[np.ndarray, float, dict]:
    """Minimize the soft-margin hinge objective; returns (w, b, info).

    Convergence is certified by the duality gap: the run stops once
    primal - dual <= tol * (1 + |primal|). The dual objective recorded in
    info["objective_trace"] never increases between checks.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")

    kernel = x @ x.T
    alpha = np.zeros(n)
    w = np.zeros(x.shape[1])
    eps_violation = 0.1
    trace: list[float] = []
    iterations = 0

    def check() -> tuple[bool, np.ndarray, float, float]:
        w_exact = (alpha * y) @ x
        scores = x @ w_exact
        b = _best_bias(scores, y, c)
        primal = _primal_objective(w_exact, b, x, y, c)
        dual = float(alpha.sum()) - 0.5 * float(w_exact @ w_exact)
        trace.append(0.5 * float(w_exact @ w_exact) - float(alpha.sum()))  # dual minimization objective
        gap = primal - dual
        return gap <= tol * (1.0 + abs(primal)), w_exact, b, gap

    while True:
        grad = y * (x @ w) - 1.0
        opt = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        no_pair = not up.any() or not low.any()
        if no_pair:
            violation = 0.0
        else:
            i = int(np.argmax(np.where(up, opt, -np.inf)))
            j = int(np.argmin(np.where(low, opt, np.inf)))
            violation = opt[i] - opt[j]
        if no_pair or violation <= eps_violation:
            done, w_exact, b, gap = check()
            if done:
                info = {"iterations": iterations, "duality_gap": gap, "objective_trace": trace}
                return w_exact, b, info
            if no_pair or violation <= 1e-12:
                # Dual optimum to machine precision yet the gap misses tol.
                raise NotConverged(f"duality gap {gap!r} above tolerance at the dual optimum")
            w = w_exact  # resync incremental drift before tightening
            eps_violation /= 10.0
            continue
        if iterations >= max_iter:
            done, w_exact, b, gap = check()
            if done:
                info = {"iterations": iterations, "duality_gap": gap, "objective_trace": trace}
                return w_exact, b, info
            raise NotConverged(f"duality gap {gap!r} above tolerance after {max_iter} pair updates")
        eta = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        hi_i = (c - alpha[i]) if y[i] > 0 else alpha[i]
        hi_j = alpha[j] if y[j] > 0 else (c - alpha[j])
        delta = min(hi_i, hi_j) if eta <= 1e-12 else min(violation / eta, hi_i, hi_j)
        alpha[i] = min(c, max(0.0, alpha[i] + y[i] * delta))
        alpha[j] = min(c, max(0.0, alpha[j] - y[j] * delta))
        w = w + delta * (x[i] - x[j])
        iterations += 1


def train_svc(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 100_000,
    standardizer: Optional[Standardizer] = None,
    freq_table: Optional[dict] = None,
) -> SvmModel:
    """Train the linear scorer on an already-standardized feature matrix.

    The solver itself is deterministic; the seed is recorded into the model
    metadata so training runs stay traceable.
    """
    x = np.asarray(x, dtype=np.float64)
    w, b, info = solve_hinge_svm(x, y, c=c, tol=tol, max_iter=max_iter)
    std = standardizer if standardizer is not None else Standardizer.identity(x.shape[1])
    primal = _primal_objective(w, b, x, np.asarray(y, dtype=np.float64), c)
    metadata = {
        "C": c,
        "seed": seed,
        "training_size": int(x.shape[0]),
        "objective": primal,
        "duality_gap": info["duality_gap"],
        "iterations": info["iterations"],
        "converged": True,
        "feature_names": list(FEATURE_NAMES) if x.shape[1] == len(FEATURE_NAMES) else [f"f{i}" for i in range(x.shape[1])],
    }
    return SvmModel(
        weights=tuple(float(v) for v in w),
        bias=float(b),
        standardizer=std,
        freq_table=dict(freq_table or {}),
        metadata=metadata,
    )


def decision_value(model: SvmModel, features: FeatureVector) -> float:
    """Signed score of one candidate under the trained model."""
    z = model.standardizer.transform(features.as_array())
    return float(z @ np.array(model.weights)) + model.bias


def _require_features(candidates: Sequence[Candidate]) -> None:
    for cand in candidates:
        if cand.features is None:
            raise ValueError(f"candidate {cand.id} has no features; run compute_features first")


def rank_by_distance(candidates: Sequence[Candidate]) -> Ranking:
    """Ascending angular distance to the pointing circle; ties break by id."""
    _require_features(candidates)
    ordered = sorted(candidates, key=lambda cand: (cand.features.circle_dist, cand.id))
    return Ranking(tuple(RankEntry(cand.id, -cand.features.circle_dist) for cand in ordered))


def rank_by_svc(model: SvmModel, candidates: Sequence[Candidate]) -> Ranking:
    """Descending decision value; ties break by id."""
    _require_features(candidates)
    scored = [(decision_value(model, cand.features), cand) for cand in candidates]
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    return Ranking(tuple(RankEntry(cand.id, score) for score, cand in scored))
