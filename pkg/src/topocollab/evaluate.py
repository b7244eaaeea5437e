"""Cross-validated evaluation of the hybrid classifier and lambda sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classify import DEFAULT_RIDGE, HybridFuzzyKNNClassifier
from .corpus import AmbiguousCase, PaperRecord
from .features import FeatureMatrix, build_features, fit_transform, resolve_feature_set
from .graph import CollabNetwork, build_network
from .measures import FIRST_LEVEL_FIELDS

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"
DEFAULT_GRID_STEP = 0.01
TIE_TOL = 1e-12


class DegenerateCaseError(ValueError):
    """The case cannot be cross-validated (e.g. an entity with one persona)."""


@dataclass(frozen=True)
class EvalConfig:
    kappa: int = 5
    m: float = 2.0
    ridge: float = DEFAULT_RIDGE
    n_folds: int = 10
    topo_fields: tuple[str, ...] = FIRST_LEVEL_FIELDS
    weighted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "topo_fields", resolve_feature_set(self.topo_fields))
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.m <= 1:
            raise ValueError("m must be > 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.n_folds < 2:
            raise ValueError("n_folds must be >= 2")


@dataclass(frozen=True)
class ConfusionMatrix:
    """``z[i, j]`` counts objects of true class ``i`` assigned to class ``j``."""

    z: np.ndarray
    labels: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return int(self.z.sum())


def _as_counts(z) -> np.ndarray:
    return np.asarray(z.z if isinstance(z, ConfusionMatrix) else z)


def accuracy(z) -> float:
    z = _as_counts(z)
    total = z.sum()
    if z.size == 0 or total == 0:
        raise ValueError("accuracy of an empty confusion matrix")
    k = min(z.shape)
    return float(np.trace(z[:k, :k]) / total)


def splitting_error(z, n_true: int) -> int:
    """Mass assigned to predicted identities beyond the first ``n_true``."""
    z = _as_counts(z)
    return int(z[:n_true, n_true:].sum())


def stratified_folds(y: Sequence[int], n_folds: int, seed: int) -> np.ndarray:
    """Fold id per object; each class is spread as evenly as possible.

    Members of each class are shuffled, classes are concatenated in code
    order and the sequence is dealt round-robin, so fold sizes differ by at
    most one.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    folds = np.empty(len(y), dtype=np.int64)
    folds[order] = np.arange(len(y)) % n_folds
    return folds


def check_case(fm: FeatureMatrix) -> None:
    counts = np.bincount(fm.y, minlength=len(fm.classes))
    if len(fm.classes) < 2:
        raise DegenerateCaseError("case has fewer than two entities")
    if counts.min() < 2:
        small = [c for c, n in zip(fm.classes, counts) if n < 2]
        raise DegenerateCaseError(f"entities with a single persona: {small}")


def prepare_case(corpus: Sequence[PaperRecord], case: AmbiguousCase, config: EvalConfig):
    net = build_network(corpus, case.alias)
    return net, build_features(net, case, config.topo_fields, config.weighted)


@dataclass(frozen=True)
class OutOfFoldMemberships:
    """Collaborative and topological memberships of every persona, each taken
    from the fold in which that persona was held out."""

    u_collab: np.ndarray
    u_topo: np.ndarray
    y: np.ndarray
    folds: np.ndarray
    n_folds: int
    classes: tuple[str, ...]

    def decisions(self, lam: float) -> np.ndarray:
        u = lam * self.u_topo + (1.0 - lam) * self.u_collab
        return np.argmax(u, axis=1)

    def score(self, lam: float) -> tuple[float, ConfusionMatrix]:
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        pred = self.decisions(lam)
        correct = pred == self.y
        gamma = float(np.mean([correct[self.folds == f].mean() for f in range(self.n_folds)]))
        c = len(self.classes)
        z = np.zeros((c, c), dtype=np.int64)
        np.add.at(z, (self.y, pred), 1)
        return gamma, ConfusionMatrix(z, self.classes)


def _hybrid_blocks(fm: FeatureMatrix) -> tuple[np.ndarray, int]:
    collab = fm.collaborative_dense(active_only=True)
    if collab.shape[1] == 0:
        collab = np.zeros((fm.n_rows, 1))
    return np.hstack([collab, fm.topological]), collab.shape[1]


def out_of_fold_memberships(fm: FeatureMatrix, config: EvalConfig, seed: int) -> OutOfFoldMemberships:
    check_case(fm)
    y = fm.y
    n_folds = min(config.n_folds, fm.n_rows)
    folds = stratified_folds(y, n_folds, seed)
    c = len(fm.classes)
    u_collab = np.empty((fm.n_rows, c))
    u_topo = np.empty((fm.n_rows, c))
    for f in range(n_folds):
        train = np.flatnonzero(folds != f)
        test = np.flatnonzero(folds == f)
        X, n_collab = _hybrid_blocks(fit_transform(fm, train))
        model = HybridFuzzyKNNClassifier(
            n_collab, lam=0.0, n_neighbors=config.kappa, m=config.m, ridge=config.ridge
        ).fit(X[train], y[train])
        if len(model.classes_) != c:
            raise DegenerateCaseError(f"fold {f} lacks a class in training")
        u_collab[test] = model.collab_.predict_proba(X[test, :n_collab])
        u_topo[test] = model.topo_.predict_proba(X[test, n_collab:])
    return OutOfFoldMemberships(u_collab, u_topo, y, folds, n_folds, fm.classes)


@dataclass(frozen=True)
class CVResult:
    gamma: float
    confusion: ConfusionMatrix
    n_folds: int
    lam: float


def cross_validate(
    case: AmbiguousCase,
    net: CollabNetwork,
    config: EvalConfig,
    lam: float,
    seed: int,
    features: FeatureMatrix | None = None,
) -> CVResult:
    fm = features if features is not None else build_features(net, case, config.topo_fields, config.weighted)
    oof = out_of_fold_memberships(fm, config, seed)
    gamma, z = oof.score(lam)
    return CVResult(gamma, z, oof.n_folds, lam)


def lambda_grid(step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    if step <= 0 or n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} must divide 1 evenly")
    return np.arange(n + 1) / n


@dataclass(frozen=True)
class SweepResult:
    alias: str
    lambda_grid: np.ndarray
    gamma_per_lambda: np.ndarray
    tied_set: tuple[float, ...]
    tied_interval: tuple[float, float]
    lambda_star: float
    n_folds: int
    confusion: ConfusionMatrix
    meta: dict = field(default_factory=dict)

    @property
    def gamma_c(self) -> float:
        return float(self.gamma_per_lambda[0])

    @property
    def gamma_t(self) -> float:
        return float(self.gamma_per_lambda[-1])

    @property
    def gamma_h_max(self) -> float:
        return float(self.gamma_per_lambda.max())


def _largest_tied_run(is_tied: np.ndarray) -> tuple[int, int]:
    """First longest run of True values, as inclusive index bounds."""
    best = None
    start = None
    for i, t in enumerate(list(is_tied) + [False]):
        if t and start is None:
            start = i
        elif not t and start is not None:
            if best is None or i - start > best[1] - best[0] + 1:
                best = (start, i - 1)
            start = None
    return best


def sweep_from_memberships(
    alias: str, oof: OutOfFoldMemberships, grid: np.ndarray
) -> SweepResult:
    scores = [oof.score(float(lam)) for lam in grid]
    gammas = np.array([g for g, _ in scores])
    is_tied = gammas >= gammas.max() - TIE_TOL
    lo, hi = _largest_tied_run(is_tied)
    mid = (lo + hi) // 2
    return SweepResult(
        alias=alias,
        lambda_grid=grid,
        gamma_per_lambda=gammas,
        tied_set=tuple(float(x) for x in grid[is_tied]),
        tied_interval=(float(grid[lo]), float(grid[hi])),
        lambda_star=float(grid[mid]),
        n_folds=oof.n_folds,
        confusion=scores[mid][1],
    )


def lambda_sweep(
    case: AmbiguousCase,
    net: CollabNetwork,
    config: EvalConfig,
    grid_step: float = DEFAULT_GRID_STEP,
    seed: int = 0,
    features: FeatureMatrix | None = None,
) -> SweepResult:
    """Hybrid accuracy over the inclusive grid ``0, step, ..., 1``.

    Folds are drawn once from ``seed`` and shared by every grid point.
    ``lambda_star`` is the middle grid point (lower middle for even runs) of
    the longest run of grid points tied at the maximum accuracy.
    """
    grid = lambda_grid(grid_step)
    fm = features if features is not None else build_features(net, case, config.topo_fields, config.weighted)
    oof = out_of_fold_memberships(fm, config, seed)
    result = sweep_from_memberships(case.alias, oof, grid)
    result.meta.update(seed=seed, rng=RNG_ALGORITHM)
    return result
