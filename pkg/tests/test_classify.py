import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone

from topocollab.classify import (
    ClassStats,
    CrispKNNClassifier,
    FuzzyKNNClassifier,
    HybridFuzzyKNNClassifier,
    MembershipMatrix,
    class_stats,
    crisp_vote,
    decide,
    fuzzy_membership,
    hybrid_membership,
    mahalanobis_distance,
    train_memberships,
)

import oracles


def test_mahalanobis_diagonal_example():
    st_ = ClassStats(np.zeros(2), np.diag([4.0, 1.0]), False, False)
    assert mahalanobis_distance([[2.0, 0.0]], st_)[0] == pytest.approx(1.0)


def test_fuzzy_two_neighbor_example():
    X = np.array([[1.0], [-2.0]])
    U = MembershipMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
    u = fuzzy_membership(X, U, [0.0], kappa=2, m=2.0)
    np.testing.assert_allclose(u, [0.8, 0.2], atol=1e-12)


def test_coincident_neighbor_dominates():
    X = np.array([[0.0], [1.0]])
    U = MembershipMatrix(np.array([[0.3, 1.0], [0.7, 0.0]]))
    np.testing.assert_allclose(fuzzy_membership(X, U, [0.0], kappa=2), [0.3, 0.7])


def test_disperse_cluster_wins_by_mahalanobis():
    rng = np.random.default_rng(3)
    tight = rng.normal([0, 0], 0.1, size=(30, 2))
    disperse = rng.normal([3, 0], 2.0, size=(30, 2))
    p = np.array([[1.2, 0.0]])
    X = np.vstack([tight, disperse, p])
    y = np.array([0] * 30 + [1] * 31)
    U, stats = train_memberships(X, y)
    assert np.linalg.norm(p - stats[0].centroid) < np.linalg.norm(p - stats[1].centroid)
    assert U.u[1, -1] > U.u[0, -1]


def test_class_stats_fallbacks():
    assert class_stats(np.array([[1.0, 2.0]])).identity_fallback
    assert class_stats(np.ones((3, 2))).identity_fallback
    assert class_stats(np.array([[0.0, 0.0], [1.0, 1.0]]), ridge=0).identity_fallback
    reg = class_stats(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert reg.regularized and not reg.identity_fallback


def test_train_memberships_bounds():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 3))
    y = np.repeat([0, 1, 2], [7, 7, 6])
    U, _ = train_memberships(X, y)
    np.testing.assert_allclose(U.column_sums(), 1, atol=1e-12)
    assert U.satisfies_class_bounds()
    with pytest.raises(ValueError):
        train_memberships(X, np.zeros(20, dtype=int))


def test_hybrid_boundaries():
    a, b = np.array([0.9, 0.1]), np.array([0.2, 0.8])
    assert (hybrid_membership(a, b, 0.0) == a).all()
    assert (hybrid_membership(a, b, 1.0) == b).all()
    with pytest.raises(ValueError):
        hybrid_membership(a, b, 1.5)


def test_decide_lowest_index_on_tie():
    assert decide([0.5, 0.5]) == 0
    assert decide([0.2, 0.4, 0.4]) == 1


def test_crisp_tie_goes_to_nearest():
    assert crisp_vote(np.array([1, 0]), 2) == 1
    assert crisp_vote(np.array([0, 1, 1, 0]), 2) == 0
    X = np.array([[0.0], [2.0], [-1.0]])
    clf = CrispKNNClassifier(2).fit(X, ["far", "far2", "near"])
    assert clf.predict([[0.0]]).tolist() == ["far"]
    clf = CrispKNNClassifier(2).fit(X[[1, 2]], ["b", "a"])
    assert clf.predict([[0.0]]).tolist() == ["a"]


def test_estimators_follow_sklearn_conventions():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(12, 4))
    y = np.array(["a", "b"] * 6)
    for est in (CrispKNNClassifier(3), FuzzyKNNClassifier(3), HybridFuzzyKNNClassifier(2, 0.4, 3)):
        fitted = clone(est).fit(X, y)
        assert set(fitted.predict(X)) <= {"a", "b"}
        assert clone(est).get_params() == est.get_params()
    proba = FuzzyKNNClassifier(3).fit(X, y).predict_proba(X)
    np.testing.assert_allclose(proba.sum(axis=1), 1, atol=1e-12)


def test_kappa_clamped_to_training_size():
    X = np.array([[0.0], [1.0], [5.0]])
    clf = FuzzyKNNClassifier(50).fit(X, [0, 0, 1])
    assert clf.predict_proba([[0.5]]).shape == (1, 2)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        FuzzyKNNClassifier(m=1.0).fit(np.zeros((2, 1)), [0, 1])
    with pytest.raises(ValueError):
        HybridFuzzyKNNClassifier(3).fit(np.zeros((4, 3)), [0, 1, 0, 1])


@pytest.mark.parametrize("seed", range(200))
def test_fuzzy_matches_literal_formula(seed):
    rng = np.random.default_rng(seed)
    n, f = int(rng.integers(2, 13)), int(rng.integers(1, 4))
    c = int(rng.integers(2, 4))
    X = rng.normal(size=(n, f))
    U = rng.random((c, n))
    U /= U.sum(axis=0)
    x = rng.normal(size=f)
    kappa = int(rng.integers(1, n + 1))
    m = float(rng.uniform(1.2, 3.5))
    got = fuzzy_membership(X, MembershipMatrix(U), x, kappa, m)
    ref = oracles.fuzzy_membership_literal(X.tolist(), U.tolist(), x.tolist(), kappa, m)
    np.testing.assert_allclose(got, ref, atol=1e-9, rtol=0)


def _two_class_data(draw_seed, n_per=10, f=3):
    rng = np.random.default_rng(draw_seed)
    X = np.vstack([rng.normal(0, 1, (n_per, f)), rng.normal(1.5, 0.7, (n_per, f))])
    return X, np.repeat([0, 1], n_per)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_memberships_affine_invariant_without_ridge(seed):
    X, y = _two_class_data(seed)
    rng = np.random.default_rng(seed + 1)
    A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    if abs(np.linalg.det(A)) < 1e-2:
        return
    U1, _ = train_memberships(X, y, ridge=0.0)
    U2, _ = train_memberships(X @ A.T + rng.normal(size=3), y, ridge=0.0)
    np.testing.assert_allclose(U1.u, U2.u, atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 1.0))
def test_hybrid_normalized_and_argmax_stable(seed, lam):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(3))
    b = rng.dirichlet(np.ones(3))
    h = hybrid_membership(a, b, lam)
    assert abs(h.sum() - 1) < 1e-12
    if decide(a) == decide(b) and a[decide(a)] > np.partition(a, -2)[-2] and b[decide(b)] > np.partition(b, -2)[-2]:
        assert decide(h) == decide(a)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_small_fuzzifier_approaches_crisp_nearest(seed):
    """As m approaches 1 the closest neighbor's memberships take over."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(8, 2))
    U = rng.dirichlet(np.ones(2), size=8).T
    x = rng.normal(size=2)
    d = np.linalg.norm(X - x, axis=1)
    order = np.argsort(d)
    if d[order[1]] / d[order[0]] < 1.5:
        return
    u = fuzzy_membership(X, MembershipMatrix(U), x, kappa=5, m=1.01)
    np.testing.assert_allclose(u, U[:, order[0]], atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 2), elements=st.floats(-5, 5)), st.integers(1, 6))
def test_fuzzy_output_is_distribution(X, kappa):
    U = np.tile([[0.25], [0.75]], 6)
    u = fuzzy_membership(X, MembershipMatrix(U), [0.1, -0.2], kappa)
    assert abs(u.sum() - 1) < 1e-9
    assert (u >= 0).all()


def test_crisp_trivial_examples():
    X = np.array([[0.0], [1.0], [2.0], [10.0]])
    assert CrispKNNClassifier(1).fit(X, [1, 1, 2, 2]).predict([[10.0]]).tolist() == [2]
    assert CrispKNNClassifier(3).fit(X, [1, 1, 2, 2]).predict([[0.5]]).tolist() == [1]


def test_class_stats_symmetric_and_invertible():
    rng = np.random.default_rng(9)
    for _ in range(50):
        X = rng.normal(size=(int(rng.integers(2, 6)), int(rng.integers(1, 6))))
        st_ = class_stats(X)
        assert np.allclose(st_.covariance, st_.covariance.T)
        assert np.isfinite(np.linalg.inv(st_.covariance)).all()
