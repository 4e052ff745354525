import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from suprank.centrality import ScoreVector
from suprank.metrics import (
    _sigmoid,
    MetricReport,
    SplitSpec,
    auc,
    average_precision_at_k,
    fit_logistic,
    logistic_regression_baseline,
    roc_curve,
    spearman,
    stratified_split,
)
from suprank.ranking import GroundTruth, Ranking, RankingError


def labelled(labels):
    """Ranking c0 > c1 > ... with the given labels in rank order."""
    ids = tuple(f"c{i}" for i in range(len(labels)))
    return Ranking(ids), GroundTruth.from_labels(dict(zip(ids, labels)))


def pair_count_auc(labels):
    pos = [i for i, y in enumerate(labels) if y]
    neg = [i for i, y in enumerate(labels) if not y]
    return sum(1 for p in pos for n in neg if p < n) / (len(pos) * len(neg))


two_class = st.lists(st.booleans(), min_size=2, max_size=40).filter(lambda ls: any(ls) and not all(ls))


class TestAuc:
    @pytest.mark.parametrize(
        "labels,expected", [([1, 1, 0, 0], 1.0), ([0, 0, 1, 1], 0.0), ([1, 0, 1, 0], 0.75)]
    )
    def test_examples(self, labels, expected):
        assert auc(*labelled(labels)) == expected

    def test_single_class(self):
        with pytest.raises(RankingError):
            auc(*labelled([1, 1]))

    @settings(max_examples=200, deadline=None)
    @given(two_class)
    def test_reverse_complements(self, labels):
        r, gt = labelled(labels)
        assert auc(r, gt) + auc(r.reversed(), gt) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(two_class, st.randoms(use_true_random=False))
    def test_invariant_within_prefix_and_suffix(self, labels, rnd):
        labels = sorted(labels, reverse=True)  # all positives first
        r, gt = labelled(labels)
        n_pos = sum(labels)
        head, tail = list(r.order[:n_pos]), list(r.order[n_pos:])
        rnd.shuffle(head)
        rnd.shuffle(tail)
        assert auc(Ranking(tuple(head + tail)), gt) == auc(r, gt) == 1.0

    def test_roc_area_matches_sklearn(self):
        rng = np.random.default_rng(0)
        labels = rng.random(60) < 0.3
        r, gt = labelled(list(labels))
        fpr, tpr = roc_curve(r, gt)
        assert np.trapezoid(tpr, fpr) == pytest.approx(auc(r, gt))
        assert auc(r, gt) == pytest.approx(roc_auc_score(labels, -np.arange(60)))


class TestAveragePrecision:
    def test_perfect_top(self):
        assert average_precision_at_k(*labelled([1, 1, 1, 0]), k=2) == 1.0

    def test_formula(self):
        assert average_precision_at_k(*labelled([1, 0, 1]), k=3) == pytest.approx(5 / 6)

    def test_no_hits_in_window(self):
        assert average_precision_at_k(*labelled([0, 0, 0, 1]), k=3) == 0.0

    def test_denominator_k(self):
        assert average_precision_at_k(*labelled([1, 0, 1, 0]), k=4, denominator="k") == pytest.approx((1 + 2 / 3) / 4)

    def test_no_positives(self):
        with pytest.raises(RankingError):
            average_precision_at_k(*labelled([0, 0]), k=2)

    @settings(max_examples=200, deadline=None)
    @given(two_class, st.data())
    def test_promoting_a_positive_never_hurts(self, labels, data):
        r, gt = labelled(labels)
        k = data.draw(st.integers(1, len(labels)))
        pos_idx = [i for i, y in enumerate(labels) if y]
        i = data.draw(st.sampled_from(pos_idx))
        neg_above = [j for j in range(i) if not labels[j]]
        if not neg_above:
            return
        j = data.draw(st.sampled_from(neg_above))
        order = list(r.order)
        order[i], order[j] = order[j], order[i]
        assert average_precision_at_k(Ranking(tuple(order)), gt, k) >= average_precision_at_k(r, gt, k) - 1e-15


class TestSpearman:
    def test_identity_and_reverse(self):
        r = Ranking((1, 2, 3, 4))
        assert spearman(r, r) == 1.0
        assert spearman(r, r.reversed()) == -1.0

    def test_example(self):
        assert spearman(Ranking((1, 2, 3, 4)), Ranking((1, 3, 2, 4))) == pytest.approx(0.8, abs=1e-12)

    def test_mismatch(self):
        with pytest.raises(RankingError):
            spearman(Ranking((1, 2)), Ranking((1, 3)))


class TestStratifiedSplit:
    def truth(self):
        return GroundTruth.from_labels({i: i < 10 for i in range(100)})

    def test_proportional(self):
        for train, test in stratified_split(self.truth(), SplitSpec(train_fraction=0.8, trials=3)):
            assert sum(1 for c in train if c < 10) == 8
            assert sum(1 for c in train if c >= 10) == 72
            assert set(train) | set(test) == set(range(100)) and not set(train) & set(test)

    def test_too_small(self):
        with pytest.raises(ValueError, match="positive class"):
            stratified_split(self.truth(), SplitSpec(train_fraction=0.04))

    def test_deterministic(self):
        spec = SplitSpec(train_fraction=0.5, trials=4, seed=3)
        assert stratified_split(self.truth(), spec) == stratified_split(self.truth(), spec)
        assert stratified_split(self.truth(), spec) != stratified_split(self.truth(), SplitSpec(0.5, trials=4, seed=4))

    def test_train_count(self):
        # 77 positives of 1716 with 343 training papers
        gt = GroundTruth.from_labels({i: i < 77 for i in range(1716)})
        train, _ = stratified_split(gt, SplitSpec(train_count=343, trials=1))[0]
        assert len(train) == 343

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=1.2)
        with pytest.raises(ValueError):
            SplitSpec()


class TestMetricReport:
    def test_summary(self):
        rep = MetricReport(k=10)
        for a in (0.7, 0.8, 0.9):
            rep.add(a, a / 2)
        d = rep.to_dict()
        assert d["auc"]["min"] <= d["auc"]["mean"] <= d["auc"]["max"]
        assert rep.auc == pytest.approx(0.8)


class TestLogistic:
    def test_zero_weights_give_half(self):
        X = np.random.default_rng(0).normal(size=(5, 2))
        coef, b, converged = fit_logistic(X, np.array([0.0, 1.0, 0.0, 1.0, 1.0]), max_iter=0)
        assert not converged and np.all(coef == 0) and b == 0.0
        np.testing.assert_array_equal(_sigmoid(X @ coef + b), 0.5)

    @pytest.mark.filterwarnings("ignore::sklearn.exceptions.ConvergenceWarning")
    def test_separable_one_dimensional(self):
        ids = list(range(40))
        x = {i: float(i) for i in ids}
        truth = GroundTruth.from_labels({i: i >= 25 for i in ids})
        noise = ScoreVector({i: float((i * 7) % 5) for i in ids})
        train, test = ids[::2], ids[1::2]
        coef, _, _ = fit_logistic(
            np.array([[x[i]] for i in train]) - np.mean([x[i] for i in train]),
            np.array([truth.label(i) for i in train], dtype=float),
        )
        assert coef[0] > 0
        r = logistic_regression_baseline([ScoreVector(x), noise], truth, train, test)
        assert auc(r, truth.restrict(test)) == 1.0

    def test_duplicated_feature(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 2))
        y = (X[:, 0] + 0.8 * X[:, 1] + rng.normal(size=200) > 0).astype(float)
        X2 = np.hstack([X, X[:, :1]])
        # the penalty splits the duplicated weight evenly
        c2, _, ok = fit_logistic(X2, y, max_iter=50000)
        assert ok and c2[0] == pytest.approx(c2[2], abs=1e-9)
        # without the penalty both fits reach the same predictions
        c1, b1, _ = fit_logistic(X, y, l2=0.0, max_iter=50000, tol=1e-10)
        c2, b2, _ = fit_logistic(X2, y, l2=0.0, max_iter=50000, tol=1e-10)
        np.testing.assert_allclose(X @ c1 + b1, X2 @ c2 + b2, atol=1e-6)

    def test_duplicated_feature_ranking_unchanged(self):
        rng = np.random.default_rng(1)
        ids = list(range(120))
        f1 = ScoreVector({i: float(rng.normal()) for i in ids})
        f2 = ScoreVector({i: float(rng.normal()) for i in ids})
        truth = GroundTruth.from_labels({i: f1[i] + f2[i] + rng.normal() > 0.5 for i in ids})
        train, test = ids[:60], ids[60:]
        single = logistic_regression_baseline([f1, f2], truth, train, test)
        double = logistic_regression_baseline([f1, f2, f1], truth, train, test)
        assert single == double

    def test_needs_two_features(self):
        truth = GroundTruth.from_labels({0: True, 1: False})
        with pytest.raises(ValueError):
            logistic_regression_baseline([ScoreVector({0: 1, 1: 0})], truth, [0, 1], [0, 1])


def test_exhaustive_small_auc():
    for n in range(2, 8):
        for labels in itertools.product([0, 1], repeat=n):
            if 0 < sum(labels) < n:
                assert auc(*labelled(list(labels))) == pair_count_auc(labels)
