import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topocollab.corpus import extract_ambiguous_cases
from topocollab.evaluate import EvalConfig, prepare_case, stratified_folds
from topocollab.relevance import (
    MAX_FEATURES,
    collaborative_crisp_accuracy,
    enumerate_subsets,
    mask_matrix,
    rank_features,
    rank_subsets,
    relevance_score,
    relevance_scores,
    select_hard_cases,
    subset_accuracies,
)
from topocollab.classify import CrispKNNClassifier
from topocollab.features import TopologicalScaler
from topocollab.synth import SynthSpec, generate_corpus

# rows are ranks 1..8; columns A, B, C
INCIDENCE = np.zeros((8, 3), dtype=int)
for col, ranks in enumerate([(2, 3, 5, 8), (1, 2, 3, 7), (3, 6, 7, 8)]):
    INCIDENCE[np.array(ranks) - 1, col] = 1


def _direct(m, j):
    return sum(m[k, j] for i in range(len(m)) for k in range(i)) + 0.5 * sum(m[:, j])


def test_incidence_example_scores():
    assert relevance_scores(INCIDENCE).tolist() == [16.0, 21.0, 10.0]
    assert [_direct(INCIDENCE, j) for j in range(3)] == [16.0, 21.0, 10.0]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda f: st.lists(st.lists(st.integers(0, 1), min_size=f, max_size=f),
                                                    min_size=1, max_size=40)))
def test_score_matches_direct_sum(rows):
    m = np.array(rows)
    for j in range(m.shape[1]):
        assert relevance_score(m, j) == pytest.approx(_direct(m, j))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10**6))
def test_moving_appearance_up_raises_score(n, seed):
    rng = np.random.default_rng(seed)
    col = rng.integers(0, 2, size=(n, 1))
    ones = np.flatnonzero(col[:, 0] == 1)
    zeros = np.flatnonzero(col[:, 0] == 0)
    if not len(ones) or not len(zeros) or zeros[0] > ones[-1]:
        return
    i = ones[-1]
    j = zeros[zeros < i][0] if (zeros < i).any() else None
    if j is None:
        return
    moved = col.copy()
    moved[i], moved[j] = 0, 1
    assert relevance_score(moved, 0) > relevance_score(col, 0)


def test_mask_matrix():
    m = mask_matrix(3)
    assert m.shape == (8, 3)
    assert m[5].tolist() == [1, 0, 1]


def test_rank_subsets_tie_order():
    acc = np.array([0.5, 0.9, 0.9, 0.9])  # masks 0..3 for two features
    r = rank_subsets(acc, ("a", "b"))
    assert r.masks.tolist() == [1, 2, 3, 0]


def test_rank_features_geometric_mean():
    t = rank_features({"x": [4.0, 1.0], "y": [1.0, 9.0]}, ("f", "g"))
    np.testing.assert_allclose(t.aggregate, [2.0, 3.0])
    assert t.rank == ("g", "f")
    same = rank_features([[5.0, 2.0], [5.0, 2.0]], ("f", "g"))
    np.testing.assert_allclose(same.aggregate, [5.0, 2.0])
    with pytest.raises(ValueError):
        rank_features([[0.0, 1.0]], ("f", "g"))


def test_select_hard_cases():
    acc = {"a": 0.5, "b": 0.95, "c": 1.0}
    assert select_hard_cases(acc, 0.9) == ["a"]
    assert select_hard_cases(acc, 1.0) == ["a", "b", "c"]
    assert select_hard_cases(acc, 0.0) == []


def test_vectorized_subsets_match_per_subset_knn():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(24, 4))
    X[rng.random(X.shape) < 0.1] = np.nan
    y = np.repeat([0, 1], 12)
    X[y == 1, 1] += 1.5
    folds = stratified_folds(y, 6, 0)
    acc = subset_accuracies(X, y, folds, kappa=3)
    bits = mask_matrix(4)
    for mask in range(1, 16):
        cols = np.flatnonzero(bits[mask])
        per_fold = []
        for f in range(6):
            tr, te = folds != f, folds == f
            Z = TopologicalScaler().fit(X[tr]).transform(X)[:, cols]
            pred = CrispKNNClassifier(3).fit(Z[tr], y[tr]).predict(Z[te])
            per_fold.append(np.mean(pred == y[te]))
        assert acc[mask] == pytest.approx(np.mean(per_fold))
    assert acc[0] == pytest.approx(0.5)


def test_feature_cap():
    with pytest.raises(ValueError, match="cap"):
        subset_accuracies(np.zeros((4, MAX_FEATURES + 1)), np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1]))


def test_path_length_is_top_feature_on_planted_topology():
    corpus = generate_corpus(SynthSpec("shared-collaborators-distinct-topology"), seed=0)
    (case,) = extract_ambiguous_cases(corpus)
    _, fm = prepare_case(corpus, case, EvalConfig())
    ranking = enumerate_subsets(fm)
    r = relevance_scores(ranking.incidence)
    assert ranking.feature_ids[int(np.argmax(r))] == "l"
    assert collaborative_crisp_accuracy(fm) < 0.9


def test_subset_counts():
    rng = np.random.default_rng(0)
    y = np.repeat([0, 1], 5)
    folds = stratified_folds(y, 5, 0)
    for f in (1, 3):
        acc = subset_accuracies(rng.normal(size=(10, f)), y, folds, kappa=3)
        assert len(acc) == 2 ** f
        assert len(rank_subsets(acc, [str(i) for i in range(f)]).masks) == 2 ** f


def test_top_only_beats_bottom_only():
    m = np.zeros((8, 2), dtype=int)
    m[:3, 0] = 1
    m[5:, 1] = 1
    r = relevance_scores(m)
    assert r[0] > r[1] >= 0
