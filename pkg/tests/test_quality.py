"""Ensemble quality model: trees, splits, training, persistence."""

import numpy as np
import pytest

from skillex.errors import TrainingError
from skillex.miner.features import PhraseCandidate, PhraseFeatures
from skillex.miner.quality import (DecisionTree, QualityModel, _best_split,
                                   _gini, _grow_tree, split_pools,
                                   train_quality_model)


def make_features(pmi=0.0, popularity=0.0, **kw):
    base = dict(popularity=popularity, pmi=pmi, pkl=0.0,
                has_inner_stopword=0.0, avg_idf=0.0, quote_prob=0.0,
                bracket_prob=0.0, capitalized_prob=0.0)
    base.update(kw)
    return PhraseFeatures(**base)


def make_candidates(n_pos, n_neg, rng):
    """Linearly separable pools: positives have pmi ~ 3, negatives ~ 0."""
    cands = []
    for i in range(n_pos):
        feats = make_features(pmi=3.0 + rng.normal(0, 0.2),
                              popularity=0.5 + rng.normal(0, 0.05))
        cands.append((PhraseCandidate(tokens=(f"pos{i}", "x"), frequency=5),
                      feats))
    for i in range(n_neg):
        feats = make_features(pmi=rng.normal(0, 0.2),
                              popularity=0.1 + rng.normal(0, 0.05))
        cands.append((PhraseCandidate(tokens=(f"neg{i}", "y"), frequency=5),
                      feats))
    return cands


def stump(feature, threshold, left_label, right_label):
    return DecisionTree(feature=[feature, -1, -1],
                        threshold=[threshold, 0.0, 0.0],
                        left=[1, -1, -1], right=[2, -1, -1],
                        label=[-1, left_label, right_label])


class TestDecisionTree:
    def test_hand_built_routing(self):
        tree = stump(feature=0, threshold=1.5, left_label=0, right_label=1)
        assert tree.predict_one([1.5, 9.0]) == 0  # boundary goes left
        assert tree.predict_one([1.6, -9.0]) == 1
        assert tree.predict([[0.0, 0.0], [2.0, 0.0]]).tolist() == [0, 1]

    def test_single_leaf(self):
        leaf = DecisionTree([-1], [0.0], [-1], [-1], [1])
        assert leaf.predict_one([42.0]) == 1
        assert leaf.depth == 0

    def test_depth(self):
        assert stump(0, 0.5, 0, 1).depth == 1

    def test_json_round_trip(self):
        tree = stump(3, 0.25, 1, 0)
        clone = DecisionTree.from_json(tree.to_json())
        X = np.random.default_rng(0).normal(size=(20, 5))
        assert clone.predict(X).tolist() == tree.predict(X).tolist()


class TestGini:
    def test_trivial_values(self):
        assert _gini(np.array([4.0, 0.0])) == 0.0
        assert _gini(np.array([0.0, 0.0])) == 0.0
        assert _gini(np.array([5.0, 5.0])) == pytest.approx(0.5)
        assert _gini(np.array([3.0, 1.0])) == pytest.approx(1 - (0.75 ** 2 + 0.25 ** 2))


def exhaustive_best_split(X, y):
    """Independent reference splitter with the same tie-break convention:
    scan features in order, thresholds ascending, keep strict improvements."""
    n = len(y)
    counts = np.bincount(y, minlength=2).astype(float)
    p = counts / n
    best_impurity = 1.0 - float(np.sum(p * p))
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2.0
            mask = X[:, f] <= t
            impurity = 0.0
            for side in (mask, ~mask):
                side_n = int(side.sum())
                if side_n == 0:
                    continue
                ones = int(y[side].sum())
                pl = np.array([side_n - ones, ones], dtype=float) / side_n
                impurity += side_n * (1.0 - float(np.sum(pl * pl)))
            impurity /= n
            if impurity < best_impurity - 1e-15:
                best_impurity = impurity
                best = (f, t)
    return best


class TestBestSplit:
    def test_matches_exhaustive_reference(self):
        rng = np.random.default_rng(7)
        for trial in range(30):
            n = int(rng.integers(2, 25))
            d = int(rng.integers(1, 5))
            X = np.round(rng.normal(size=(n, d)), 1)
            y = rng.integers(0, 2, size=n).astype(np.int64)
            assert _best_split(X, y) == exhaustive_best_split(X, y)

    def test_pure_labels_yield_none(self):
        X = np.array([[0.0], [1.0], [2.0]])
        assert _best_split(X, np.array([1, 1, 1])) is None

    def test_constant_features_yield_none(self):
        X = np.ones((4, 2))
        assert _best_split(X, np.array([0, 1, 0, 1])) is None

    def test_obvious_split(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        assert _best_split(X, y) == (0, 5.5)


class TestGrowTree:
    def test_separable_data_fit_exactly(self):
        rng = np.random.default_rng(3)
        X = np.concatenate([rng.normal(0, 0.3, size=(20, 3)),
                            rng.normal(4, 0.3, size=(20, 3))])
        y = np.array([0] * 20 + [1] * 20)
        tree = _grow_tree(X, y, max_depth=4)
        assert tree.predict(X).tolist() == y.tolist()

    def test_max_depth_zero_is_majority_leaf(self):
        X = np.array([[0.0], [1.0], [2.0]])
        tree = _grow_tree(X, np.array([1, 1, 0]), max_depth=0)
        assert tree.depth == 0
        assert tree.predict_one([5.0]) == 1

    def test_tied_leaf_votes_negative(self):
        X = np.ones((4, 1))
        tree = _grow_tree(X, np.array([0, 1, 0, 1]), max_depth=4)
        assert tree.predict_one([1.0]) == 0

    def test_depth_respected(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(60, 4))
        y = rng.integers(0, 2, size=60).astype(np.int64)
        assert _grow_tree(X, y, max_depth=2).depth <= 2


class TestQualityModel:
    def test_vote_fraction_on_grid(self):
        trees = [stump(0, 0.5, 0, 1), stump(0, 1.5, 0, 1),
                 stump(0, 2.5, 0, 1), stump(0, 3.5, 0, 1)]
        model = QualityModel(trees=trees)
        # x = 2.0 exceeds thresholds 0.5 and 1.5 only
        assert model.quality([2.0]) == 0.5
        assert model.quality([0.0]) == 0.0
        assert model.quality([9.0]) == 1.0

    def test_accepts_phrase_features(self):
        model = QualityModel(trees=[stump(1, 1.0, 0, 1)])
        assert model.quality(make_features(pmi=2.0)) == 1.0
        assert model.quality(make_features(pmi=0.5)) == 0.0

    def test_quality_many_matches_scalar(self):
        rng = np.random.default_rng(5)
        cands = make_candidates(6, 10, rng)
        model = train_quality_model({("pos0", "x")},
                                    cands, T=15, seed=2)
        rows = [feats.vector() for _, feats in cands]
        many = model.quality_many(rows)
        singles = [model.quality(r) for r in rows]
        assert many.tolist() == singles

    def test_quality_many_empty(self):
        model = QualityModel(trees=[stump(0, 0.0, 0, 1)])
        assert model.quality_many([]).shape == (0,)


class TestSplitPools:
    def test_case_insensitive_match(self):
        cands = [(PhraseCandidate(tokens=("Machine", "Learning"), frequency=3),
                  make_features()),
                 (PhraseCandidate(tokens=("big", "data"), frequency=3),
                  make_features())]
        pos, neg = split_pools({("machine", "LEARNING")}, cands)
        assert pos == [0]
        assert neg == [1]


class TestTraining:
    def test_separable_pools_score_correctly(self):
        rng = np.random.default_rng(19)
        cands = make_candidates(8, 40, rng)
        positives = {cand.tokens for cand, _ in cands[:8]}
        model = train_quality_model(positives, cands, T=50, seed=7)
        scores = model.quality_many([f.vector() for _, f in cands])
        assert scores[:8].min() >= 0.9
        assert scores[8:].max() <= 0.1

    def test_same_seed_identical_model(self):
        rng = np.random.default_rng(23)
        cands = make_candidates(5, 20, rng)
        positives = {cand.tokens for cand, _ in cands[:5]}
        a = train_quality_model(positives, cands, T=10, seed=3)
        b = train_quality_model(positives, cands, T=10, seed=3)
        assert a.to_json() == b.to_json()

    def test_different_seed_differs(self):
        rng = np.random.default_rng(29)
        cands = make_candidates(5, 20, rng)
        positives = {cand.tokens for cand, _ in cands[:5]}
        a = train_quality_model(positives, cands, T=10, seed=3)
        b = train_quality_model(positives, cands, T=10, seed=4)
        assert a.to_json() != b.to_json()

    def test_empty_positive_list_rejected(self):
        rng = np.random.default_rng(1)
        with pytest.raises(TrainingError, match="positive phrase list"):
            train_quality_model(set(), make_candidates(2, 2, rng), T=2)

    def test_no_candidates_rejected(self):
        with pytest.raises(TrainingError, match="no candidates"):
            train_quality_model({("a", "b")}, [], T=2)

    def test_unmatched_positives_rejected(self):
        rng = np.random.default_rng(1)
        with pytest.raises(TrainingError, match="extend the list"):
            train_quality_model({("absent", "phrase")},
                                make_candidates(2, 2, rng), T=2)

    def test_empty_negative_pool_rejected(self):
        rng = np.random.default_rng(1)
        cands = make_candidates(3, 0, rng)
        positives = {cand.tokens for cand, _ in cands}
        with pytest.raises(TrainingError, match="negative pool"):
            train_quality_model(positives, cands, T=2)


class TestPersistence:
    def test_save_load_save_byte_identical(self, tmp_path):
        rng = np.random.default_rng(31)
        cands = make_candidates(5, 15, rng)
        positives = {cand.tokens for cand, _ in cands[:5]}
        model = train_quality_model(positives, cands, T=8, seed=11)
        first = tmp_path / "q1.json"
        second = tmp_path / "q2.json"
        model.save(first)
        QualityModel.load(first).save(second)
        assert first.read_bytes() == second.read_bytes()

    def test_seed_recorded(self, tmp_path):
        rng = np.random.default_rng(31)
        cands = make_candidates(4, 10, rng)
        positives = {cand.tokens for cand, _ in cands[:4]}
        model = train_quality_model(positives, cands, T=4, seed=99)
        path = tmp_path / "q.json"
        model.save(path)
        assert QualityModel.load(path).training_seed == 99

    def test_wrong_format_rejected(self):
        with pytest.raises(TrainingError, match="not a quality model"):
            QualityModel.from_json({"format": "something.else"})

    def test_wrong_version_rejected(self):
        with pytest.raises(TrainingError, match="version"):
            QualityModel.from_json({"format": QualityModel.FORMAT,
                                    "format_version": 99, "trees": [],
                                    "feature_names": []})

    def test_loaded_model_predicts_identically(self, tmp_path):
        rng = np.random.default_rng(37)
        cands = make_candidates(5, 15, rng)
        positives = {cand.tokens for cand, _ in cands[:5]}
        model = train_quality_model(positives, cands, T=8, seed=1)
        path = tmp_path / "q.json"
        model.save(path)
        clone = QualityModel.load(path)
        rows = [f.vector() for _, f in cands]
        assert clone.quality_many(rows).tolist() == \
            model.quality_many(rows).tolist()
