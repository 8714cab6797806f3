"""Pair construction, solver correctness, scoring, and persistence."""

import json

import numpy as np
import pytest

from emorank.errors import (
    DimensionMismatchError,
    EmptyClassError,
    InvalidParamsError,
    NoOrderedPairsError,
    NonFiniteError,
    ParseError,
    SchemaVersionMismatchError,
)
from emorank.ranker import (
    MAX_ORDERED_PAIRS,
    PairSets,
    RankingModel,
    build_pairs,
    load_model,
    objective,
    save_model,
    score,
    train_ranker,
)


def _toy_pairs():
    # Four 1-d samples, one ordered pair with difference 2, no similar pairs.
    features = np.array([[0.0], [0.0], [2.0], [2.0]])
    return PairSets(np.array([[2, 0]]), np.empty((0, 2)), features)


class TestPairSets:
    def test_self_pair_rejected(self):
        with pytest.raises(InvalidParamsError):
            PairSets(np.array([[1, 1]]), np.empty((0, 2)), np.zeros((3, 2)))

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidParamsError):
            PairSets(np.array([[0, 5]]), np.empty((0, 2)), np.zeros((3, 2)))


class TestBuildPairs:
    def test_cross_product_counts(self):
        features = np.arange(8.0).reshape(4, 2)
        labels = ["emotional", "emotional", "neutral", "neutral"]
        pairs = build_pairs(features, labels, n_similar=2, seed=0)
        assert pairs.ordered.shape == (4, 2)
        assert pairs.similar.shape == (2, 2)
        # ordered pairs are (emotional, neutral)
        assert set(pairs.ordered[:, 0]) == {0, 1}
        assert set(pairs.ordered[:, 1]) == {2, 3}

    def test_similar_pairs_same_class(self):
        rng = np.random.default_rng(0)
        labels = ["emotional"] * 5 + ["neutral"] * 5
        pairs = build_pairs(rng.normal(size=(10, 3)), labels, n_similar=8, seed=1)
        cls = np.array([0] * 5 + [1] * 5)
        assert np.all(cls[pairs.similar[:, 0]] == cls[pairs.similar[:, 1]])
        assert np.all(pairs.similar[:, 0] != pairs.similar[:, 1])

    def test_default_n_similar_is_half(self):
        features = np.zeros((8, 2))
        labels = ["emotional"] * 4 + ["neutral"] * 4
        pairs = build_pairs(features, labels, seed=0)
        assert pairs.ordered.shape[0] == 16
        assert pairs.similar.shape[0] == 8

    def test_sampling_kicks_in_above_limit(self):
        rng = np.random.default_rng(2)
        labels = ["emotional"] * 150 + ["neutral"] * 100
        pairs = build_pairs(rng.normal(size=(250, 2)), labels, n_similar=0, seed=3)
        assert pairs.ordered.shape[0] == MAX_ORDERED_PAIRS
        assert np.unique(pairs.ordered, axis=0).shape[0] == MAX_ORDERED_PAIRS
        assert np.all(pairs.ordered[:, 0] < 150)
        assert np.all(pairs.ordered[:, 1] >= 150)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(4)
        features = rng.normal(size=(250, 2))
        labels = ["emotional"] * 150 + ["neutral"] * 100
        a = build_pairs(features, labels, seed=7)
        b = build_pairs(features, labels, seed=7)
        c = build_pairs(features, labels, seed=8)
        np.testing.assert_array_equal(a.ordered, b.ordered)
        np.testing.assert_array_equal(a.similar, b.similar)
        assert not np.array_equal(a.ordered, c.ordered)

    def test_empty_class_rejected(self):
        with pytest.raises(EmptyClassError):
            build_pairs(np.zeros((3, 1)), ["neutral"] * 3)

    def test_unknown_label_rejected(self):
        with pytest.raises(InvalidParamsError):
            build_pairs(np.zeros((2, 1)), ["neutral", "angry"])

    def test_singleton_class_gets_no_similar_pairs(self):
        labels = ["emotional", "neutral", "neutral"]
        pairs = build_pairs(np.zeros((3, 1)), labels, n_similar=4, seed=0)
        # the emotional side cannot form within-class pairs
        assert np.all(pairs.similar >= 1)


class TestObjective:
    def test_two_pairs_at_zero(self):
        features = np.array([[0.0], [2.0]])
        pairs = PairSets(np.array([[1, 0], [1, 0]]), np.empty((0, 2)), features)
        assert objective(np.zeros(1), pairs, c=1.0) == 2.0

    def test_no_pairs_is_ridge_only(self):
        pairs = PairSets(np.empty((0, 2)), np.empty((0, 2)), np.zeros((2, 3)))
        w = np.array([1.0, 2.0, 2.0])
        assert objective(w, pairs, c=1.0) == 4.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            objective(np.zeros(2), _toy_pairs(), c=1.0)


class TestTrainRanker:
    def test_toy_closed_form(self):
        model = train_ranker(_toy_pairs(), c=1.0, standardize=False)
        assert model.weights[0] == pytest.approx(4.0 / 9.0, abs=1e-9)
        assert model.solver_report["final_objective"] == pytest.approx(1.0 / 9.0, abs=1e-9)
        assert model.solver_report["converged"]

    def test_toy_closed_form_other_c(self):
        # stationary point of 0.5 w^2 + c (1 - 2 w)^2 is 4c / (1 + 8c)
        for c in (0.25, 1.0, 5.0):
            model = train_ranker(_toy_pairs(), c=c, standardize=False)
            assert model.weights[0] == pytest.approx(4.0 * c / (1.0 + 8.0 * c), abs=1e-9)

    def test_toy_score_endpoints(self):
        model = train_ranker(_toy_pairs(), c=1.0, standardize=False)
        features = _toy_pairs().features
        assert score(model, features[0]) == 0.0
        assert score(model, features[2]) == 1.0

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(11)
        grid = np.linspace(-5.0, 5.0, 1001)
        mesh = np.stack(np.meshgrid(grid, grid), axis=-1).reshape(-1, 2)
        for _ in range(5):
            features = rng.normal(0.0, 1.0, (6, 2))
            ordered = np.array([[0, 1], [2, 3]])
            similar = np.array([[4, 5]])
            pairs = PairSets(ordered, similar, features)
            model = train_ranker(pairs, c=1.0, standardize=False)
            d_ord = features[ordered[:, 0]] - features[ordered[:, 1]]
            d_sim = features[similar[:, 0]] - features[similar[:, 1]]
            hinge = np.maximum(0.0, 1.0 - mesh @ d_ord.T)
            vals = 0.5 * (mesh ** 2).sum(1) + (hinge ** 2).sum(1) + ((mesh @ d_sim.T) ** 2).sum(1)
            assert model.solver_report["final_objective"] <= vals.min() + 1e-3

    def test_duplicated_pairs_match_doubled_c(self):
        rng = np.random.default_rng(12)
        features = rng.normal(size=(8, 3))
        ordered = np.array([[0, 4], [1, 5], [2, 6]])
        similar = np.array([[0, 1], [4, 5]])
        single = PairSets(ordered, similar, features)
        doubled = PairSets(np.vstack([ordered, ordered]),
                           np.vstack([similar, similar]), features)
        w_double_pairs = train_ranker(doubled, c=1.0, standardize=False).weights
        w_double_c = train_ranker(single, c=2.0, standardize=False).weights
        np.testing.assert_allclose(w_double_pairs, w_double_c, atol=1e-9)

    def test_objective_history_non_increasing(self):
        rng = np.random.default_rng(13)
        features = rng.normal(size=(40, 10))
        labels = ["emotional"] * 20 + ["neutral"] * 20
        features[:20, 0] += 3.0
        pairs = build_pairs(features, labels, seed=0)
        model = train_ranker(pairs, c=1.0)
        history = model.solver_report["objective_history"]
        assert len(history) >= 2
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
        assert model.solver_report["grad_norm"] <= 1e-6

    def test_separable_classes_rank_correctly(self):
        rng = np.random.default_rng(14)
        dim = 384
        emo = rng.normal(0.0, 1.0, (60, dim))
        emo[:, 0] += 4.0
        neu = rng.normal(0.0, 1.0, (60, dim))
        features = np.vstack([emo, neu])
        labels = ["emotional"] * 60 + ["neutral"] * 60
        pairs = build_pairs(features, labels, seed=0)
        model = train_ranker(pairs, c=1.0)
        xs = (features - model.feature_mean) / model.feature_std
        margins = (xs[pairs.ordered[:, 0]] - xs[pairs.ordered[:, 1]]) @ model.weights
        assert np.mean(margins > 0.0) >= 0.99

    def test_standardization_makes_scores_affine_invariant(self):
        rng = np.random.default_rng(15)
        features = rng.normal(size=(30, 5))
        features[:15, 1] += 2.0
        labels = ["emotional"] * 15 + ["neutral"] * 15
        pairs_a = build_pairs(features, labels, seed=1)
        pairs_b = build_pairs(features * 3.0 + 7.0, labels, seed=1)
        model_a = train_ranker(pairs_a, c=1.0)
        model_b = train_ranker(pairs_b, c=1.0)
        for i in range(30):
            sa = score(model_a, features[i])
            sb = score(model_b, features[i] * 3.0 + 7.0)
            assert sa == pytest.approx(sb, abs=1e-9)

    def test_no_ordered_pairs_rejected(self):
        pairs = PairSets(np.empty((0, 2)), np.array([[0, 1]]), np.zeros((2, 2)))
        with pytest.raises(NoOrderedPairsError):
            train_ranker(pairs)

    def test_non_finite_rejected(self):
        features = np.array([[0.0], [np.inf]])
        pairs = PairSets(np.array([[1, 0]]), np.empty((0, 2)), features)
        with pytest.raises(NonFiniteError):
            train_ranker(pairs)

    def test_bad_c_rejected(self):
        with pytest.raises(InvalidParamsError):
            train_ranker(_toy_pairs(), c=0.0)


class TestScore:
    def _model(self):
        return RankingModel("happy", 1.0, np.array([1.0]), np.array([0.0]),
                            np.array([1.0]), 0.0, 1.0, {})

    def test_clamping(self):
        model = self._model()
        assert score(model, np.array([2.0])) == 1.0
        assert score(model, np.array([-1.0])) == 0.0
        assert score(model, np.array([0.25])) == 0.25

    def test_degenerate_range_gives_half(self):
        model = self._model()
        model.attr_max = model.attr_min
        assert score(model, np.array([0.7])) == 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            score(self._model(), np.array([1.0, 2.0]))


class TestPersistence:
    def _trained(self):
        rng = np.random.default_rng(16)
        features = rng.normal(size=(20, 4))
        features[:10, 2] += 2.5
        labels = ["emotional"] * 10 + ["neutral"] * 10
        return train_ranker(build_pairs(features, labels, seed=0),
                            c=1.5, emotion="sad"), features

    def test_round_trip_exact(self, tmp_path):
        model, features = self._trained()
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        assert back.emotion == "sad"
        assert back.c == 1.5
        np.testing.assert_array_equal(back.weights, model.weights)
        np.testing.assert_array_equal(back.feature_mean, model.feature_mean)
        np.testing.assert_array_equal(back.feature_std, model.feature_std)
        assert back.attr_min == model.attr_min
        assert back.attr_max == model.attr_max
        for row in features:
            assert score(back, row) == score(model, row)

    def test_schema_fields_present(self, tmp_path):
        model, _ = self._trained()
        path = tmp_path / "model.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        assert set(payload) == {"version", "emotion", "C", "weights", "feature_mean",
                                "feature_std", "attr_min", "attr_max", "solver_report"}
        assert payload["version"] == 1
        assert len(payload["weights"]) == 4

    def test_wrong_version_rejected(self, tmp_path):
        model, _ = self._trained()
        path = tmp_path / "model.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(SchemaVersionMismatchError):
            load_model(path)

    def test_corrupted_file_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{ not json")
        with pytest.raises(ParseError):
            load_model(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"version": 1, "emotion": "sad"}))
        with pytest.raises(SchemaVersionMismatchError):
            load_model(path)
