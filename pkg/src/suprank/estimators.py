"""scikit-learn compatible wrappers around the rank aggregators.

Rows of ``X`` are candidates and columns are rankers; larger entries mean
"more influential". ``fit`` learns ranker weights from the labelled rows,
and ``decision_function`` scores new rows by their aggregated position, so
the estimators plug into ``cross_val_score(..., scoring="roc_auc")``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.metrics import roc_auc_score
from sklearn.utils.multiclass import type_of_target
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .aggregate import DEFAULT_TOP_K, AggregationSpec, compute_ranker_weights
from .ranking import GroundTruth, rank_by_score


class RankAggregator(ClassifierMixin, BaseEstimator):
    """Aggregate the column-wise rankings of ``X``.

    Parameters
    ----------
    method : {"skr", "kemeny_quicksort", "local_kemenization", "borda", "supervised_borda"}
    top_k : int or float
        Prefix length per ranker, or a fraction of the number of rows.
    supervised : bool or None
        Learn AUC/AP weights in ``fit``. ``None`` picks the method's default.
    weight_metric, weight_scheme : str
        Passed to :func:`~suprank.aggregate.compute_ranker_weights`.
    initial : {"supervised_borda", "borda"}
        Starting arrangement for the comparison sorts.
    ap_k : int
        Cutoff used when ``weight_metric="ap_at_k"``.
    random_state : int
        Seed for score tie-breaking and quicksort pivots.
    """

    def __init__(
        self,
        method="skr",
        top_k=DEFAULT_TOP_K,
        supervised=None,
        weight_metric="auc",
        weight_scheme="plain",
        initial="supervised_borda",
        ap_k=100,
        random_state=0,
    ):
        self.method = method
        self.top_k = top_k
        self.supervised = supervised
        self.weight_metric = weight_metric
        self.weight_scheme = weight_scheme
        self.initial = initial
        self.ap_k = ap_k
        self.random_state = random_state

    def _spec(self) -> AggregationSpec:
        return AggregationSpec(
            method=self.method,
            top_k=self.top_k,
            supervised=self.supervised,
            weight_metric=self.weight_metric,
            weight_scheme=self.weight_scheme,
            initial=self.initial,
            seed=self.random_state,
        )

    def _column_rankings(self, X):
        ids = range(X.shape[0])
        return [rank_by_score(dict(zip(ids, X[:, j])), self.random_state + j) for j in range(X.shape[1])]

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if type_of_target(y) != "binary" or len(self.classes_) != 2:
            raise ValueError("y must hold exactly two classes")
        positive = y == self.classes_[1]
        spec = self._spec()
        self.n_features_in_ = X.shape[1]
        if spec.supervised:
            truth = GroundTruth.from_labels(dict(enumerate(positive)))
            self.weights_ = np.asarray(
                compute_ranker_weights(
                    self._column_rankings(X), truth, self.weight_metric, self.weight_scheme, self.ap_k
                )
            )
        else:
            self.weights_ = np.full(X.shape[1], 1.0 / X.shape[1])
        self.positive_rate_ = float(positive.mean())
        return self

    def rank(self, X) -> np.ndarray:
        """Row indices of ``X`` ordered from most to least preferred."""
        check_is_fitted(self, "weights_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        if X.shape[0] == 1:
            return np.zeros(1, dtype=int)
        ranking = self._spec().run(self._column_rankings(X), list(self.weights_))
        return np.asarray(ranking.order, dtype=int)

    def decision_function(self, X) -> np.ndarray:
        """``n - position`` of each row in the aggregate; higher is better."""
        order = self.rank(X)
        n = len(order)
        scores = np.empty(n)
        scores[order] = n - np.arange(1, n + 1)
        return scores

    def predict(self, X) -> np.ndarray:
        """Label the top rows positive, as many as the training positive rate implies."""
        order = self.rank(X)
        n_pos = int(round(self.positive_rate_ * len(order)))
        out = np.full(len(order), self.classes_[0])
        out[order[:n_pos]] = self.classes_[1]
        return out

    def score(self, X, y, sample_weight=None) -> float:
        """ROC AUC of :meth:`decision_function` against ``y``."""
        return roc_auc_score(y, self.decision_function(X), sample_weight=sample_weight)


class SupervisedKemenyRanker(RankAggregator):
    """:class:`RankAggregator` fixed to supervised Kemeny ranking (quicksort, learned weights)."""

    def __init__(
        self,
        top_k=DEFAULT_TOP_K,
        weight_metric="auc",
        weight_scheme="plain",
        initial="supervised_borda",
        ap_k=100,
        random_state=0,
    ):
        super().__init__(
            method="skr",
            top_k=top_k,
            supervised=True,
            weight_metric=weight_metric,
            weight_scheme=weight_scheme,
            initial=initial,
            ap_k=ap_k,
            random_state=random_state,
        )
