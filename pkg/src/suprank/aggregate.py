"""Rank aggregation: Borda variants and majority-table comparison sorts.

The Kemeny-style aggregators all share one comparator built from a weighted
majority table over top-k prefixes. Pairs the table cannot separate fall
back to their order in an initial arrangement, so every output is a total
ordering of the initial arrangement's candidates.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np

from .metrics import auc, average_precision_at_k
from .ranking import GroundTruth, MajorityTable, Ranking, RankingError, build_majority_table, rank_by_score

METHODS = ("borda", "supervised_borda", "local_kemenization", "kemeny_quicksort", "skr")
DEFAULT_TOP_K = 0.15


def _check_total_same(rankings: Sequence[Ranking]) -> list:
    if not rankings:
        raise RankingError("no rankings given")
    cands = rankings[0].order
    ref = set(cands)
    for r in rankings:
        if not r.is_total or len(r) != len(cands) or r.candidates != ref:
            raise RankingError("all rankings must be total orderings over the same candidates")
    return list(cands)


def _borda_order(rankings, weights, seed) -> Ranking:
    cands = _check_total_same(rankings)
    m = len(cands)
    scores = {c: 0 for c in cands}
    for r, w in zip(rankings, weights):
        if w == 0:
            continue
        for pos, c in enumerate(r.order, 1):
            scores[c] += w * (m - pos)
    return rank_by_score(scores, seed)


def borda(rankings: Sequence[Ranking], seed: int = 0) -> Ranking:
    """Order by mean count of candidates ranked below; seeded tie-breaking."""
    # integer sums order identically to means and keep ties exact
    return _borda_order(rankings, [1] * len(rankings), seed)


def supervised_borda(rankings: Sequence[Ranking], weights: Sequence[float], seed: int = 0) -> Ranking:
    """Borda with each ranker's positional score scaled by its weight."""
    weights = _check_weights(weights, len(rankings))
    return _borda_order(rankings, weights, seed)


def _check_weights(weights, r) -> list:
    weights = [float(w) for w in weights]
    if len(weights) != r:
        raise RankingError(f"{len(weights)} weights given for {r} rankings")
    if any(not math.isfinite(w) or w < 0 for w in weights):
        raise RankingError(f"weights must be finite and nonnegative, got {weights}")
    if not any(weights):
        raise RankingError("at least one weight must be positive")
    return weights


def resolve_top_k(top_k: Union[int, float, None], m: int) -> int:
    """Turn a count, or a fraction of ``m`` given as a float in (0, 1], into a prefix length."""
    if top_k is None:
        top_k = DEFAULT_TOP_K
    if isinstance(top_k, float) and top_k <= 1:
        if not top_k > 0:
            raise RankingError(f"fractional top_k must lie in (0, 1], got {top_k}")
        return max(1, int(math.floor(top_k * m + 0.5)))
    k = int(top_k)
    if k != top_k or not 1 <= k <= m:
        raise RankingError(f"top_k must be an integer in [1, {m}], got {top_k}")
    return k


def _majority_comparator(table: MajorityTable, initial: Ranking):
    pos = {c: i for i, c in enumerate(initial.order)}

    def before(a, b) -> bool:
        s = table.compare(a, b)
        if s:
            return s > 0
        return pos[a] < pos[b]

    return before


def _quicksort(items: list, before, rng: np.random.Generator) -> list:
    out: list = []
    # explicit stack; a frame is either a list to split or a placed pivot
    stack: list = [items]
    while stack:
        part = stack.pop()
        if not isinstance(part, list):
            out.append(part[0])
            continue
        if len(part) <= 1:
            out.extend(part)
            continue
        p = int(rng.integers(len(part)))
        pivot = part[p]
        left, right = [], []
        for i, c in enumerate(part):
            if i == p:
                continue
            (left if before(c, pivot) else right).append(c)
        stack.extend((right, (pivot,), left))
    return out


def _bubble_sort(items: list, before) -> list:
    items = list(items)
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(items) - 1):
            if before(items[i + 1], items[i]):
                items[i], items[i + 1] = items[i + 1], items[i]
                swapped = True
    return items


def _majority_sort(rankings, weights, top_k, initial, sort_kind, seed) -> tuple[Ranking, MajorityTable]:
    if not rankings:
        raise RankingError("no rankings given")
    weights = _check_weights(weights, len(rankings))
    if not initial.is_total:
        raise RankingError("initial ordering must be total")
    universe = initial.candidates
    for r in rankings:
        extra = r.candidates - universe
        if extra:
            raise RankingError(f"ranking mentions candidates absent from the initial ordering: {sorted(map(str, extra))[:5]}")
    k = resolve_top_k(top_k, len(initial))
    shortest = min(len(r) for r in rankings)
    if k > shortest:
        raise RankingError(f"top_k={k} must lie in [1, {shortest}] (shortest ranking length)")
    table = build_majority_table(rankings, weights, k)
    before = _majority_comparator(table, initial)
    if sort_kind == "quick":
        order = _quicksort(list(initial.order), before, np.random.default_rng(seed))
    elif sort_kind == "bubble":
        order = _bubble_sort(list(initial.order), before)
    else:
        raise ValueError(f"sort_kind must be 'quick' or 'bubble', got {sort_kind!r}")
    return Ranking(tuple(order)), table


def skr(
    rankings: Sequence[Ranking],
    weights: Sequence[float],
    top_k: int,
    initial: Ranking,
    seed: int = 0,
    sort_kind: Literal["quick", "bubble"] = "quick",
) -> Ranking:
    """Supervised Kemeny ranking.

    Builds the weighted majority table over each ranker's top-``top_k``
    prefix, then quicksorts ``initial`` (random pivots from ``seed``) with
    the weighted-majority comparator. Ties keep their ``initial`` order.
    """
    return _majority_sort(rankings, weights, top_k, initial, sort_kind, seed)[0]


def kemeny_quicksort(rankings: Sequence[Ranking], top_k: int, initial: Ranking, seed: int = 0) -> Ranking:
    """Unweighted majority quicksort (expected 2-approximation of Kemeny on full lists)."""
    return skr(rankings, [1] * len(rankings), top_k, initial, seed)


def local_kemenization(
    rankings: Sequence[Ranking],
    weights: Sequence[float],
    top_k: int,
    initial: Ranking,
    seed: int = 0,
) -> Ranking:
    """Bubble-sort ``initial`` with the weighted-majority comparator until no adjacent swap applies."""
    return skr(rankings, weights, top_k, initial, seed, sort_kind="bubble")


def compute_ranker_weights(
    rankings: Sequence[Ranking],
    truth: GroundTruth,
    metric: Literal["auc", "ap_at_k"] = "auc",
    scheme: Literal["plain", "offset", "log_odds"] = "plain",
    k: int = 100,
) -> list[float]:
    """Per-ranker weights from performance on the labelled candidates in ``truth``.

    Each ranking is restricted to ``truth``'s candidates before scoring, so
    only those labels are ever read. Weights are normalized to sum to 1.
    """
    if not truth.positives or not truth.negatives:
        raise RankingError("training labels contain a single class; ranker weights are undefined")
    ids = set(truth.ids)
    values = []
    for r in rankings:
        sub = r.restrict(ids)
        if len(sub) != len(ids):
            raise RankingError("a ranking does not cover every training candidate")
        if metric == "auc":
            values.append(auc(sub, truth))
        elif metric == "ap_at_k":
            values.append(average_precision_at_k(sub, truth, min(k, len(sub))))
        else:
            raise ValueError(f"unknown weight metric {metric!r}")
    if scheme == "plain":
        raw = values
    elif scheme == "offset":
        raw = [max(v - 0.5, 0.0) for v in values]
    elif scheme == "log_odds":
        eps = 1e-6
        raw = [max(math.log(min(max(v, eps), 1 - eps) / (1 - min(max(v, eps), 1 - eps))), 0.0) for v in values]
    else:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    total = sum(raw)
    if total <= 0:
        warnings.warn(f"all ranker weights are zero under scheme {scheme!r}; using uniform weights", RuntimeWarning)
        return [1.0 / len(rankings)] * len(rankings)
    return [w / total for w in raw]


@dataclass
class AggregationSpec:
    """Declarative description of one aggregation run.

    ``weights=None`` means uniform weights unless ``supervised`` is set, in
    which case the harness learns them from training labels.
    """

    method: str = "skr"
    weights: Optional[list] = None
    top_k: Union[int, float] = DEFAULT_TOP_K
    initial: Literal["supervised_borda", "borda"] = "supervised_borda"
    sort_kind: Optional[Literal["quick", "bubble"]] = None
    supervised: Optional[bool] = None
    weight_metric: Literal["auc", "ap_at_k"] = "auc"
    weight_scheme: Literal["plain", "offset", "log_odds"] = "plain"
    seed: int = 0
    name: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.supervised is None:
            self.supervised = self.method in ("skr", "supervised_borda")
        if self.sort_kind is None:
            self.sort_kind = "bubble" if self.method == "local_kemenization" else "quick"
        if isinstance(self.top_k, float) and not 0 < self.top_k <= 1:
            raise ValueError(f"fractional top_k must lie in (0, 1], got {self.top_k}")
        if isinstance(self.top_k, int) and self.top_k < 1:
            raise ValueError(f"top_k must be positive, got {self.top_k}")
        if self.name is None:
            self.name = self.method

    def run(self, rankings: Sequence[Ranking], weights: Optional[Sequence[float]] = None) -> Ranking:
        """Aggregate ``rankings``. ``weights`` overrides ``self.weights``; uniform if neither is set."""
        r = len(rankings)
        w = weights if weights is not None else self.weights
        if w is None:
            w = [1.0] * r
        w = _check_weights(w, r)
        if self.method == "borda":
            return borda(rankings, self.seed)
        if self.method == "supervised_borda":
            return supervised_borda(rankings, w, self.seed)
        cands = _check_total_same(rankings)
        k = resolve_top_k(self.top_k, len(cands))
        if self.initial == "borda":
            initial = borda(rankings, self.seed)
        else:
            initial = supervised_borda(rankings, w, self.seed)
        if self.method == "kemeny_quicksort":
            w = [1.0] * r
        return skr(rankings, w, k, initial, self.seed, sort_kind=self.sort_kind)
