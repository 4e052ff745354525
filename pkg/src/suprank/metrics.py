"""Ranking metrics, stratified splitting and the logistic-regression fusion baseline."""

from __future__ import annotations

import math
import statistics
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from sklearn.exceptions import ConvergenceWarning

from .ranking import GroundTruth, Ranking, RankingError, rank_by_score


def _labels_in_order(ranking: Ranking, truth: GroundTruth) -> list[bool]:
    return [truth.label(c) for c in ranking.order]


def auc(ranking: Ranking, truth: GroundTruth) -> float:
    """Fraction of (positive, negative) pairs with the positive ranked higher."""
    labels = _labels_in_order(ranking, truth)
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise RankingError("AUC needs both positive and negative candidates")
    concordant = 0
    negatives_below = n_neg
    for y in labels:
        if y:
            concordant += negatives_below
        else:
            negatives_below -= 1
    return concordant / (n_pos * n_neg)


def roc_curve(ranking: Ranking, truth: GroundTruth) -> tuple[list[float], list[float]]:
    """(FPR, TPR) after each cutoff, starting from (0, 0)."""
    labels = _labels_in_order(ranking, truth)
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise RankingError("ROC needs both positive and negative candidates")
    fpr, tpr = [0.0], [0.0]
    tp = fp = 0
    for y in labels:
        if y:
            tp += 1
        else:
            fp += 1
        fpr.append(fp / n_neg)
        tpr.append(tp / n_pos)
    return fpr, tpr


def average_precision_at_k(
    ranking: Ranking,
    truth: GroundTruth,
    k: int,
    denominator: Literal["min", "k"] = "min",
) -> float:
    """Sum of precision@i over positive hits within the top ``k``.

    Divided by ``min(k, #positives)`` by default, so a perfect top-k list
    scores 1; ``denominator="k"`` divides by ``k`` instead.
    """
    if not 1 <= k <= len(ranking):
        raise RankingError(f"k must lie in [1, {len(ranking)}], got {k}")
    n_pos = sum(truth.label(c) for c in ranking.order)
    if n_pos == 0:
        raise RankingError("average precision needs at least one positive")
    hits = 0
    total = 0.0
    for i, c in enumerate(ranking.order[:k], 1):
        if truth.label(c):
            hits += 1
            total += hits / i
    if denominator == "min":
        return total / min(k, n_pos)
    if denominator == "k":
        return total / k
    raise ValueError(f"denominator must be 'min' or 'k', got {denominator!r}")


def spearman(a: Ranking, b: Ranking) -> float:
    """Spearman rank correlation from squared position differences."""
    if a.candidates != b.candidates or not (a.is_total and b.is_total):
        diff = sorted(map(str, a.candidates ^ b.candidates))
        raise RankingError(f"rankings cover different candidates; symmetric difference: {diff[:10]}")
    m = len(a)
    if m < 2:
        raise RankingError("spearman needs at least two candidates")
    d2 = sum((a.position(c) - b.position(c)) ** 2 for c in a.order)
    return 1.0 - 6.0 * d2 / (m * (m * m - 1))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: Optional[float] = None
    train_count: Optional[int] = None
    trials: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if (self.train_fraction is None) == (self.train_count is None):
            raise ValueError("give exactly one of train_fraction and train_count")
        if self.train_fraction is not None and not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.train_count is not None and self.train_count < 1:
            raise ValueError(f"train_count must be positive, got {self.train_count}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(truth: GroundTruth, spec: SplitSpec) -> list[tuple[list, list]]:
    """One ``(train_ids, test_ids)`` pair per trial, in ``truth`` order.

    Each class contributes ``round(fraction * class_size)`` training ids;
    every class must keep at least one id on each side.
    """
    ids = truth.ids
    n = len(ids)
    frac = spec.train_fraction if spec.train_fraction is not None else spec.train_count / n
    if spec.train_count is not None and spec.train_count >= n:
        raise ValueError(f"train_count {spec.train_count} leaves no test candidates (n={n})")
    if spec.stratified:
        groups = [truth.positives, truth.negatives]
        for g, name in zip(groups, ("positive", "negative")):
            if not g:
                raise ValueError(f"no {name} candidates to stratify")
            c = _round_half_up(frac * len(g))
            if c < 1 or c >= len(g):
                raise ValueError(
                    f"{name} class of size {len(g)} gives {c} training ids at fraction {frac:.4g}; "
                    "need at least one on each side"
                )
    else:
        groups = [ids]
    splits = []
    for trial in range(spec.trials):
        rng = np.random.default_rng([spec.seed, trial])
        train = set()
        for g in groups:
            c = _round_half_up(frac * len(g))
            picked = rng.choice(len(g), size=c, replace=False)
            train.update(g[i] for i in picked)
        splits.append(([c for c in ids if c in train], [c for c in ids if c not in train]))
    return splits


@dataclass
class MetricReport:
    """Per-trial AUC and AP@k values with summary statistics."""

    k: int
    auc_trials: list = field(default_factory=list)
    ap_trials: list = field(default_factory=list)

    def add(self, auc_value: float, ap_value: float) -> None:
        self.auc_trials.append(auc_value)
        self.ap_trials.append(ap_value)

    @staticmethod
    def _summary(values: Sequence[float]) -> dict:
        if not values:
            return {"mean": None, "std": None, "min": None, "max": None}
        return {
            "mean": statistics.fmean(values),
            "std": statistics.pstdev(values) if len(values) > 1 else 0.0,
            "min": min(values),
            "max": max(values),
        }

    @property
    def auc(self) -> Optional[float]:
        return self._summary(self.auc_trials)["mean"]

    @property
    def ap_at_k(self) -> Optional[float]:
        return self._summary(self.ap_trials)["mean"]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "auc": self._summary(self.auc_trials),
            "ap_at_k": self._summary(self.ap_trials),
            "auc_trials": list(self.auc_trials),
            "ap_trials": list(self.ap_trials),
        }


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1e-4,
    max_iter: int = 5000,
    tol: float = 1e-8,
) -> tuple[np.ndarray, float, bool]:
    """L2-penalized logistic regression by full-batch gradient ascent.

    Maximizes ``mean log-likelihood - l2/2 * ||coef||^2`` (intercept not
    penalized) with the fixed step ``1/L`` for the gradient's Lipschitz
    bound ``L``. Returns ``(coef, intercept, converged)``.
    """
    n, d = X.shape
    Xb = np.hstack([X, np.ones((n, 1))])
    w = np.zeros(d + 1)
    lipschitz = 0.25 * np.linalg.norm(Xb, 2) ** 2 / n + l2
    step = 1.0 / lipschitz
    penalty = np.r_[np.full(d, l2), 0.0]
    converged = False
    for _ in range(max_iter):
        grad = Xb.T @ (y - _sigmoid(Xb @ w)) / n - penalty * w
        if np.linalg.norm(grad) < tol:
            converged = True
            break
        w += step * grad
    return w[:d], float(w[d]), converged


def logistic_regression_baseline(
    score_vectors: Sequence,
    truth: GroundTruth,
    train_ids: Sequence,
    test_ids: Sequence,
    l2: float = 1e-4,
    max_iter: int = 5000,
    tol: float = 1e-8,
    seed: int = 0,
) -> Ranking:
    """Rank ``test_ids`` by a logistic model fitted on ranker scores of ``train_ids``.

    Features are standardized with training statistics. Failure to converge
    issues a :class:`~sklearn.exceptions.ConvergenceWarning`.
    """
    if len(score_vectors) < 2:
        raise ValueError("logistic regression baseline needs at least two score vectors")

    def features(ids):
        return np.array([[sv.scores.get(c, 0.0) for sv in score_vectors] for c in ids], dtype=float)

    X_train, X_test = features(train_ids), features(test_ids)
    y = np.array([truth.label(c) for c in train_ids], dtype=float)
    if y.min() == y.max():
        raise RankingError("training ids contain a single class")
    mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)
    std[std == 0] = 1.0
    coef, intercept, converged = fit_logistic((X_train - mean) / std, y, l2, max_iter, tol)
    if not converged:
        warnings.warn("logistic regression did not reach the gradient tolerance", ConvergenceWarning)
    # rank on the logit; probabilities saturate to equal floats
    logit = ((X_test - mean) / std) @ coef + intercept
    return rank_by_score(dict(zip(test_ids, logit)), seed)
