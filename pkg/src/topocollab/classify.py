"""Crisp and fuzzy k-nearest-neighbor classifiers and their hybrid.

The fuzzy classifier assigns each training object a soft class membership
from inverse Mahalanobis distances to the class centroids, then classifies a
query by distance-weighted averaging of its nearest neighbors' memberships.
The hybrid mixes the memberships obtained on the collaborative block and on
the topological block of the same feature rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

DEFAULT_RIDGE = 1e-6
# Floor for a Mahalanobis distance of exactly zero (point on a centroid).
EPS_DIST = 1e-12
# Squared distances are rounded before neighbor ranking so that equal
# distances computed along different summation orders tie exactly.
DIST_DECIMALS = 9


@dataclass(frozen=True)
class ClassStats:
    centroid: np.ndarray
    covariance: np.ndarray
    regularized: bool
    identity_fallback: bool


@dataclass(frozen=True)
class MembershipMatrix:
    """``u[i, j]``: membership of training object ``j`` in class ``i``."""

    u: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.u.shape[0]

    @property
    def n_objects(self) -> int:
        return self.u.shape[1]

    def column_sums(self) -> np.ndarray:
        return self.u.sum(axis=0)

    def satisfies_class_bounds(self) -> bool:
        """Every class holds a strictly positive, strictly partial share of mass."""
        totals = self.u.sum(axis=1)
        return bool(np.all(totals > 0) and np.all(totals < self.n_objects))


def class_stats(X: np.ndarray, ridge: float = DEFAULT_RIDGE) -> ClassStats:
    """Centroid and (population) covariance of one class.

    The covariance gets ``ridge * trace/F`` added to its diagonal. Classes with
    fewer than two objects, a zero trace, or a covariance that is still not
    positive definite fall back to the identity.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, f = X.shape
    centroid = X.mean(axis=0)
    if n < 2:
        return ClassStats(centroid, np.eye(f), False, True)
    centered = X - centroid
    cov = centered.T @ centered / n
    trace = float(np.trace(cov))
    if trace <= 0:
        return ClassStats(centroid, np.eye(f), False, True)
    if ridge > 0:
        cov = cov + (ridge * trace / f) * np.eye(f)
    try:
        cholesky(cov, lower=True)
    except LinAlgError:
        return ClassStats(centroid, np.eye(f), ridge > 0, True)
    return ClassStats(centroid, cov, ridge > 0, False)


def mahalanobis_distance(X: np.ndarray, stats: ClassStats) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    L = cholesky(stats.covariance, lower=True)
    z = solve_triangular(L, (X - stats.centroid).T, lower=True)
    return np.sqrt(np.maximum((z * z).sum(axis=0), 0.0))


def train_memberships(
    X, y, ridge: float = DEFAULT_RIDGE, n_classes: int | None = None
) -> tuple[MembershipMatrix, list[ClassStats]]:
    """Soft memberships of training rows from inverse Mahalanobis distances.

    ``y`` holds integer class codes ``0..c-1``; every class needs at least one
    row.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    c = int(y.max()) + 1 if n_classes is None else n_classes
    if c < 2:
        raise ValueError("at least two classes are required")
    stats = []
    sim = np.empty((c, X.shape[0]))
    for i in range(c):
        members = X[y == i]
        if members.shape[0] == 0:
            raise ValueError(f"class {i} has no training objects")
        st = class_stats(members, ridge)
        stats.append(st)
        sim[i] = 1.0 / np.maximum(mahalanobis_distance(X, st), EPS_DIST)
    return MembershipMatrix(sim / sim.sum(axis=0, keepdims=True)), stats


def _neighbor_order(d2: np.ndarray, kappa: int) -> np.ndarray:
    """Indices of the ``kappa`` nearest training rows per query, ties by index."""
    return np.argsort(np.round(d2, DIST_DECIMALS), axis=1, kind="stable")[:, :kappa]


def _fuzzy_from_neighbors(dist: np.ndarray, U: np.ndarray, m: float) -> np.ndarray:
    """Membership of one query given neighbor distances and their u-columns.

    ``U`` is ``(c, kappa)``. Zero distances dominate the weighting, so when
    present the result is the mean of the coincident neighbors' columns.
    """
    zero = dist == 0
    if zero.any():
        return U[:, zero].mean(axis=1)
    logw = (2.0 / (1.0 - m)) * np.log(dist)
    w = np.exp(logw - logw.max())
    return U @ w / w.sum()


def fuzzy_membership(X_train, memberships: MembershipMatrix, x, kappa: int, m: float = 2.0) -> np.ndarray:
    """Fuzzy kNN membership vector of a single query ``x``."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if m <= 1:
        raise ValueError("m must be > 1")
    X_train = np.asarray(X_train, dtype=float)
    x = np.asarray(x, dtype=float).reshape(1, -1)
    d2 = cdist(x, X_train, "sqeuclidean")
    nbrs = _neighbor_order(d2, min(kappa, X_train.shape[0]))[0]
    return _fuzzy_from_neighbors(np.sqrt(d2[0, nbrs]), memberships.u[:, nbrs], m)


def hybrid_membership(u_collab, u_topo, lam: float) -> np.ndarray:
    """Convex mix; ``lam`` weights the topological memberships."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return lam * np.asarray(u_topo, dtype=float) + (1.0 - lam) * np.asarray(u_collab, dtype=float)


def decide(u) -> int:
    """Index of the largest membership; the lowest index wins ties."""
    u = np.asarray(u)
    if u.size == 0:
        raise ValueError("empty membership vector")
    return int(np.argmax(u))


def crisp_vote(neighbor_classes: np.ndarray, n_classes: int) -> int:
    """Majority class of neighbors listed nearest first.

    A tie goes to the tied class whose closest member comes first.
    """
    counts = np.bincount(neighbor_classes, minlength=n_classes)
    tied = counts == counts.max()
    for cls in neighbor_classes:
        if tied[cls]:
            return int(cls)
    raise AssertionError("unreachable")


class CrispKNNClassifier(ClassifierMixin, BaseEstimator):
    """Majority-vote kNN on Euclidean distance with nearest-tied-class tie-break."""

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        self.classes_, self.y_ = np.unique(y, return_inverse=True)
        self.X_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X)
        kappa = min(self.n_neighbors, self.X_.shape[0])
        nbrs = _neighbor_order(cdist(X, self.X_, "sqeuclidean"), kappa)
        codes = [crisp_vote(self.y_[row], len(self.classes_)) for row in nbrs]
        return self.classes_[codes]


class FuzzyKNNClassifier(ClassifierMixin, BaseEstimator):
    """Fuzzy kNN with Mahalanobis-derived training memberships.

    Parameters
    ----------
    n_neighbors : int
        Neighborhood size; clamped to the training set size.
    m : float
        Fuzzifier, ``> 1``. Neighbor weights are ``d ** (2 / (1 - m))``.
    ridge : float
        Relative diagonal loading of the per-class covariances. ``0``
        disables it.
    """

    def __init__(self, n_neighbors: int = 5, m: float = 2.0, ridge: float = DEFAULT_RIDGE):
        self.n_neighbors = n_neighbors
        self.m = m
        self.ridge = ridge

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.m <= 1:
            raise ValueError("m must be > 1")
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.memberships_, self.class_stats_ = train_memberships(X, codes, self.ridge, len(self.classes_))
        self.X_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self)
        X = check_array(X)
        kappa = min(self.n_neighbors, self.X_.shape[0])
        d2 = cdist(X, self.X_, "sqeuclidean")
        nbrs = _neighbor_order(d2, kappa)
        U = self.memberships_.u
        out = np.empty((X.shape[0], len(self.classes_)))
        for q, row in enumerate(nbrs):
            out[q] = _fuzzy_from_neighbors(np.sqrt(d2[q, row]), U[:, row], self.m)
        return out

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class HybridFuzzyKNNClassifier(ClassifierMixin, BaseEstimator):
    """Fuzzy kNN on two feature blocks mixed by ``lam``.

    ``X`` is the horizontal stack ``[collaborative | topological]`` with the
    first ``n_collab`` columns collaborative. ``lam=0`` reproduces the
    collaborative classifier and ``lam=1`` the topological one.
    """

    def __init__(self, n_collab: int, lam: float = 0.5, n_neighbors: int = 5, m: float = 2.0,
                 ridge: float = DEFAULT_RIDGE):
        self.n_collab = n_collab
        self.lam = lam
        self.n_neighbors = n_neighbors
        self.m = m
        self.ridge = ridge

    def _split(self, X):
        return X[:, : self.n_collab], X[:, self.n_collab:]

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        if not 0 < self.n_collab < X.shape[1]:
            raise ValueError("n_collab must leave both blocks non-empty")
        collab, topo = self._split(X)
        params = dict(n_neighbors=self.n_neighbors, m=self.m, ridge=self.ridge)
        self.collab_ = FuzzyKNNClassifier(**params).fit(collab, y)
        self.topo_ = FuzzyKNNClassifier(**params).fit(topo, y)
        self.classes_ = self.collab_.classes_
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self)
        X = check_array(X)
        collab, topo = self._split(X)
        return hybrid_membership(self.collab_.predict_proba(collab), self.topo_.predict_proba(topo), self.lam)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
