"""Per-persona collaborative and topological feature matrices."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.impute import SimpleImputer
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.utils.validation import check_array, check_is_fitted

from .corpus import AmbiguousCase
from .graph import CollabNetwork, components, persona_label
from .measures import ALL_FIELDS, FIRST_LEVEL_FIELDS, HIERARCHICAL_FIELDS, topo_vector

FEATURE_SETS = {
    "default": FIRST_LEVEL_FIELDS,
    "extended": FIRST_LEVEL_FIELDS + HIERARCHICAL_FIELDS,
}
# Path-based measures only compare personas that share a component.
COMPONENT_BOUND_FIELDS = ("l", "b")


def resolve_feature_set(spec: str | Sequence[str]) -> tuple[str, ...]:
    """Accept a named set (``default``/``extended``) or explicit field names."""
    if isinstance(spec, str):
        if spec in FEATURE_SETS:
            return FEATURE_SETS[spec]
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    fields = tuple(spec)
    unknown = [f for f in fields if f not in ALL_FIELDS]
    if unknown or not fields:
        raise ValueError(f"unknown topological fields {unknown}; choose from {ALL_FIELDS}")
    if len(set(fields)) != len(fields):
        raise ValueError("duplicate topological fields")
    return fields


class TopologicalScaler(TransformerMixin, BaseEstimator):
    """Mean imputation followed by z-scoring, both fitted on training rows.

    Columns with zero training variance are centered and left unscaled, so
    training values in them map to 0. A column with no available training
    value imputes to 0.
    """

    def fit(self, X, y=None):
        X = check_array(X, ensure_all_finite="allow-nan")
        self.pipeline_ = make_pipeline(
            SimpleImputer(strategy="mean", keep_empty_features=True),
            StandardScaler(),
        ).fit(X)
        imputer, scaler = self.pipeline_.steps[0][1], self.pipeline_.steps[1][1]
        self.impute_values_ = imputer.statistics_
        self.mean_ = scaler.mean_
        self.scale_ = scaler.scale_
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, ensure_all_finite="allow-nan")
        return self.pipeline_.transform(X)


@dataclass(frozen=True)
class FeatureMatrix:
    rows: tuple[int, ...]
    row_labels: tuple[str, ...]
    labels: tuple[str, ...]
    classes: tuple[str, ...]
    collaborative: sp.csr_matrix
    collab_columns: tuple[int, ...]
    topological: np.ndarray
    topo_fields: tuple[str, ...]
    isolated: tuple[bool, ...]
    scaler: TopologicalScaler | None = None

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def y(self) -> np.ndarray:
        """Integer class codes into ``classes``."""
        lookup = {c: i for i, c in enumerate(self.classes)}
        return np.array([lookup[e] for e in self.labels], dtype=np.int64)

    def collaborative_dense(self, active_only: bool = True) -> np.ndarray:
        """Dense collaborative block; ``active_only`` drops all-zero columns."""
        dense = self.collaborative.toarray()
        if active_only:
            dense = dense[:, np.flatnonzero(np.abs(dense).sum(axis=0) > 0)]
        return dense

    def topo_columns(self, fields: Sequence[str]) -> np.ndarray:
        idx = [self.topo_fields.index(f) for f in fields]
        return self.topological[:, idx]


def build_features(
    net: CollabNetwork,
    case: AmbiguousCase,
    topo_fields: str | Sequence[str] = "default",
    weighted: bool = False,
) -> FeatureMatrix:
    fields = resolve_feature_set(topo_fields)
    if not case.personas:
        raise ValueError("case has no personas")
    rows = []
    for paper_id, _ in case.personas:
        label = persona_label(case.alias, paper_id)
        if label not in net.index:
            raise ValueError(f"persona {label!r} is not a node of the network")
        rows.append(net.index[label])

    columns = tuple(v for v in range(net.n_nodes) if not net.is_persona(v))
    col_of = {v: c for c, v in enumerate(columns)}
    data, ri, ci = [], [], []
    for r, v in enumerate(rows):
        for u, w in sorted(net.neighbors(v).items()):
            if u in col_of:
                ri.append(r)
                ci.append(col_of[u])
                data.append(w)
    collab = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), len(columns)), dtype=float)

    comp = components(net)
    vectors = [topo_vector(net, v, comp, weighted) for v in rows]
    topo = np.array([vec.as_array(fields) for vec in vectors], dtype=float).reshape(len(rows), len(fields))

    counts: dict[int, int] = {}
    for v in rows:
        counts[comp.component_of[v]] = counts.get(comp.component_of[v], 0) + 1
    dominant = max(sorted(counts), key=lambda c: counts[c])
    bound = [i for i, f in enumerate(fields) if f in COMPONENT_BOUND_FIELDS]
    for r, v in enumerate(rows):
        if comp.component_of[v] != dominant:
            topo[r, bound] = np.nan

    return FeatureMatrix(
        rows=tuple(rows),
        row_labels=tuple(net.labels[v] for v in rows),
        labels=tuple(e for _, e in case.personas),
        classes=case.classes,
        collaborative=collab,
        collab_columns=columns,
        topological=topo,
        topo_fields=fields,
        isolated=tuple(len(net.neighbors(v)) == 0 for v in rows),
    )


def fit_transform(matrix: FeatureMatrix, train_rows: Sequence[int] | np.ndarray) -> FeatureMatrix:
    """Standardize the topological block with statistics of ``train_rows`` only."""
    train_rows = np.asarray(train_rows, dtype=np.int64)
    if train_rows.size == 0:
        raise ValueError("train_rows must be non-empty")
    scaler = TopologicalScaler().fit(matrix.topological[train_rows])
    return dataclasses.replace(matrix, topological=scaler.transform(matrix.topological), scaler=scaler)
