"""Feature relevance from exhaustive subset classifiers.

Every subset of the topological features (the empty one included) drives a
crisp kNN whose cross-validated accuracy ranks the subsets. A feature's
relevance is the area under its cumulative appearance curve down that
ranking, so features used by the best subsets score highest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classify import DIST_DECIMALS, CrispKNNClassifier
from .features import FeatureMatrix, TopologicalScaler
from .evaluate import stratified_folds

MAX_FEATURES = 20


@dataclass(frozen=True)
class SubsetRanking:
    """Subsets sorted best first; ``incidence[i, j]`` is 1 if row i uses feature j."""

    feature_ids: tuple[str, ...]
    masks: np.ndarray
    accuracies: np.ndarray
    incidence: np.ndarray


@dataclass(frozen=True)
class RelevanceTable:
    feature_ids: tuple[str, ...]
    case_ids: tuple[str, ...]
    per_case_r: np.ndarray
    aggregate: np.ndarray
    rank: tuple[str, ...]


def mask_matrix(n_features: int) -> np.ndarray:
    """``(2**F, F)`` 0/1 matrix; row ``b`` holds the bits of bitmask ``b``."""
    masks = np.arange(2 ** n_features)
    return ((masks[:, None] >> np.arange(n_features)) & 1).astype(np.int64)


def _majority(y: np.ndarray, n_classes: int) -> int:
    return int(np.argmax(np.bincount(y, minlength=n_classes)))


def _crisp_all_subsets(Xtr, ytr, Xte, kappa, n_classes, bits):
    """Crisp kNN predictions for every subset at once: ``(n_subsets, n_test)``."""
    diff2 = (Xte[:, None, :] - Xtr[None, :, :]) ** 2
    d2 = np.round(np.einsum("qtf,sf->sqt", diff2, bits.astype(float)), DIST_DECIMALS)
    k = min(kappa, Xtr.shape[0])
    nbrs = np.argsort(d2, axis=2, kind="stable")[:, :, :k]
    ncls = ytr[nbrs]
    counts = np.zeros(ncls.shape[:2] + (n_classes,), dtype=np.int64)
    for c in range(n_classes):
        counts[:, :, c] = (ncls == c).sum(axis=2)
    tied = counts == counts.max(axis=2, keepdims=True)
    first = np.argmax(np.take_along_axis(tied, ncls, axis=2), axis=2)
    pred = np.take_along_axis(ncls, first[:, :, None], axis=2)[:, :, 0]
    pred[0] = _majority(ytr, n_classes)
    return pred


def subset_accuracies(
    X: np.ndarray, y: np.ndarray, folds: np.ndarray, kappa: int = 5, n_classes: int | None = None
) -> np.ndarray:
    """Cross-validated crisp kNN accuracy of every feature subset, by bitmask.

    The topological columns are imputed and standardized per fold from the
    training rows. The empty subset predicts the training-fold majority.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    n_features = X.shape[1]
    if n_features > MAX_FEATURES:
        raise ValueError(f"{n_features} features exceed the cap of {MAX_FEATURES}; reduce the feature set")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    bits = mask_matrix(n_features)
    n_folds = int(folds.max()) + 1
    per_fold = np.zeros((n_folds, len(bits)))
    for f in range(n_folds):
        train, test = folds != f, folds == f
        Z = TopologicalScaler().fit(X[train]).transform(X)
        pred = _crisp_all_subsets(Z[train], y[train], Z[test], kappa, n_classes, bits)
        per_fold[f] = (pred == y[test][None, :]).mean(axis=1)
    return per_fold.mean(axis=0)


def rank_subsets(accuracies: np.ndarray, feature_ids: Sequence[str]) -> SubsetRanking:
    """Sort by accuracy (descending), then subset size, then bitmask."""
    n_features = len(feature_ids)
    bits = mask_matrix(n_features)
    if len(accuracies) != len(bits):
        raise ValueError("need one accuracy per subset")
    masks = np.arange(len(bits))
    order = np.lexsort((masks, bits.sum(axis=1), -np.asarray(accuracies)))
    return SubsetRanking(tuple(feature_ids), masks[order], np.asarray(accuracies)[order], bits[order])


def enumerate_subsets(
    fm: FeatureMatrix,
    features: Sequence[str] | None = None,
    kappa: int = 5,
    n_folds: int = 10,
    seed: int = 0,
) -> SubsetRanking:
    features = tuple(features) if features is not None else fm.topo_fields
    if len(features) > MAX_FEATURES:
        raise ValueError(f"{len(features)} features exceed the cap of {MAX_FEATURES}; reduce the feature set")
    y = fm.y
    folds = stratified_folds(y, min(n_folds, fm.n_rows), seed)
    acc = subset_accuracies(fm.topo_columns(features), y, folds, kappa, len(fm.classes))
    return rank_subsets(acc, features)


def relevance_score(incidence: np.ndarray, j: int) -> float:
    """Area under the cumulative appearance curve of feature ``j``.

    Equal to ``sum_i sum_{k<i} m[k, j] + sum_i m[i, j] / 2``.
    """
    col = np.asarray(incidence)[:, j].astype(float)
    before = np.cumsum(col) - col
    return float(before.sum() + 0.5 * col.sum())


def relevance_scores(incidence: np.ndarray) -> np.ndarray:
    return np.array([relevance_score(incidence, j) for j in range(np.asarray(incidence).shape[1])])


def rank_features(per_case: Mapping[str, Sequence[float]] | Sequence[Sequence[float]],
                  feature_ids: Sequence[str]) -> RelevanceTable:
    """Order features by decreasing geometric mean of their per-case scores."""
    if isinstance(per_case, Mapping):
        case_ids, rows = tuple(per_case), [per_case[k] for k in per_case]
    else:
        rows = list(per_case)
        case_ids = tuple(str(i) for i in range(len(rows)))
    if not rows:
        raise ValueError("no cases to rank")
    r = np.asarray(rows, dtype=float)
    if r.shape[1] != len(feature_ids):
        raise ValueError("every case must score every feature")
    if np.any(r <= 0):
        raise ValueError("relevance scores must be positive for a geometric mean")
    gmean = np.exp(np.log(r).mean(axis=0))
    order = sorted(range(len(feature_ids)), key=lambda j: (-gmean[j], j))
    return RelevanceTable(tuple(feature_ids), case_ids, r, gmean, tuple(feature_ids[j] for j in order))


def select_hard_cases(case_accuracy: Mapping[str, float], threshold: float = 0.9) -> list[str]:
    """Cases whose collaborative crisp kNN accuracy is below ``threshold``.

    A threshold of 1 keeps every case, perfectly separated ones included.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    return [case for case, acc in case_accuracy.items() if acc < threshold or threshold >= 1.0]


def collaborative_crisp_accuracy(fm: FeatureMatrix, kappa: int = 5, n_folds: int = 10, seed: int = 0) -> float:
    """Cross-validated crisp kNN accuracy on the collaborative block."""
    y = fm.y
    folds = stratified_folds(y, min(n_folds, fm.n_rows), seed)
    X = fm.collaborative_dense(active_only=True)
    if X.shape[1] == 0:
        X = np.zeros((fm.n_rows, 1))
    scores = []
    for f in range(int(folds.max()) + 1):
        train, test = folds != f, folds == f
        clf = CrispKNNClassifier(kappa).fit(X[train], y[train])
        scores.append(float(np.mean(clf.predict(X[test]) == y[test])))
    return float(np.mean(scores))
