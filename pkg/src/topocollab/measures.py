"""Topological measurements of single nodes in a collaboration network.

Shortest-path quantities (average path length, betweenness, rings) count
hops by default. ``weighted=True`` switches path length and betweenness to
an edge cost of ``1/w``; rings always use hops.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import networkx as nx
import numpy as np

from .graph import CollabNetwork, ComponentLabeling, components

FIRST_LEVEL_FIELDS = ("k1", "s1", "kn_mean", "kn_std", "sn_mean", "sn_std", "c1", "l", "b", "loc")
HIERARCHICAL_FIELDS = ("k2", "k3", "s2", "s3", "c2", "c3")
ALL_FIELDS = FIRST_LEVEL_FIELDS + HIERARCHICAL_FIELDS


@dataclass(frozen=True)
class TopoVector:
    """Measurement vector of one node; unavailable fields hold NaN."""

    k1: float
    s1: float
    kn_mean: float
    kn_std: float
    sn_mean: float
    sn_std: float
    c1: float
    l: float
    b: float
    k2: float
    k3: float
    s2: float
    s3: float
    c2: float
    c3: float
    loc: float

    def available(self, name: str) -> bool:
        return not math.isnan(getattr(self, name))

    @property
    def missing(self) -> frozenset[str]:
        return frozenset(f for f in ALL_FIELDS if not self.available(f))

    def as_array(self, fields: Sequence[str] = FIRST_LEVEL_FIELDS) -> np.ndarray:
        return np.array([getattr(self, f) for f in fields], dtype=float)


@dataclass(frozen=True)
class HierarchyView:
    """Concentric rings around ``center``; ``rings[h-1]`` is R_h."""

    center: int
    rings: tuple[frozenset[int], ...]
    n_nodes: int

    @property
    def h_max(self) -> int:
        return len(self.rings)

    def ring(self, h: int) -> frozenset[int]:
        return self.rings[h - 1]

    def ball(self, h: int) -> frozenset[int]:
        """Center plus rings 1..h."""
        out = {self.center}
        for ring in self.rings[:h]:
            out |= ring
        return frozenset(out)

    def ring_vector(self, h: int) -> np.ndarray:
        """Indicator of R_h (``nu_h`` after thresholding); h=0 is the center."""
        vec = np.zeros(self.n_nodes, dtype=np.int64)
        vec[list(self.ring(h)) if h else [self.center]] = 1
        return vec

    def ball_vector(self, h: int) -> np.ndarray:
        vec = np.zeros(self.n_nodes, dtype=np.int64)
        vec[list(self.ball(h))] = 1
        return vec


def degree(net: CollabNetwork, v: int) -> int:
    return len(net.neighbors(v))


def strength(net: CollabNetwork, v: int) -> float:
    return math.fsum(net.neighbors(v).values())


def neighborhood_stats(net: CollabNetwork, v: int) -> tuple[float, float, float, float]:
    """Mean and population std of neighbor degrees and strengths.

    All four are NaN for an isolated node.
    """
    nbrs = list(net.neighbors(v))
    if not nbrs:
        return (math.nan,) * 4
    k = np.array([degree(net, u) for u in nbrs], dtype=float)
    s = np.array([strength(net, u) for u in nbrs])
    return float(k.mean()), float(k.std()), float(s.mean()), float(s.std())


def clustering(net: CollabNetwork, v: int) -> float:
    nbrs = list(net.neighbors(v))
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = sum(1 for a in range(k) for b in range(a + 1, k) if nbrs[b] in net.neighbors(nbrs[a]))
    return links / (k * (k - 1) / 2)


def avg_shortest_path(
    net: CollabNetwork, v: int, comp: ComponentLabeling | None = None, weighted: bool = False
) -> float:
    """Mean distance from ``v`` to the other nodes of its component (NaN if alone)."""
    comp = comp or components(net)
    size = comp.size_of(v)
    if size < 2:
        return math.nan
    g = net.to_networkx()
    if weighted:
        dist = nx.single_source_dijkstra_path_length(g, v, weight="cost")
    else:
        dist = nx.single_source_shortest_path_length(g, v)
    return math.fsum(dist.values()) / (size - 1)


def _all_betweenness(net: CollabNetwork, weighted: bool) -> dict[int, float]:
    key = ("betweenness", weighted)
    if key not in net._cache:
        # normalized=False on an undirected graph already sums unordered pairs
        net._cache[key] = nx.betweenness_centrality(
            net.to_networkx(), normalized=False, weight="cost" if weighted else None
        )
    return net._cache[key]


def betweenness(
    net: CollabNetwork, v: int, comp: ComponentLabeling | None = None, weighted: bool = False
) -> float:
    comp = comp or components(net)
    if comp.size_of(v) < 3:
        return 0.0
    return float(_all_betweenness(net, weighted)[v])


def hierarchy(net: CollabNetwork, v: int, h_max: int = 3) -> HierarchyView:
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    seen = {v}
    frontier = {v}
    rings = []
    for _ in range(h_max):
        nxt = set()
        for u in frontier:
            for x in net.neighbors(u):
                if x not in seen:
                    nxt.add(x)
        seen |= nxt
        rings.append(frozenset(nxt))
        frontier = nxt
    return HierarchyView(v, tuple(rings), net.n_nodes)


def hierarchical_measures(net: CollabNetwork, view: HierarchyView, level: int) -> tuple[int, float, float]:
    """Degree, strength and clustering of the collapsed ball of radius ``level-1``.

    The center and rings 1..level-1 become one supernode; its edges are the
    original edges leaving that ball, all of which land in ring ``level``.
    """
    if level < 2:
        raise ValueError("hierarchical level must be >= 2")
    if view.h_max < level:
        raise ValueError(f"view only has rings up to {view.h_max}, need {level}")
    inside = view.ball(level - 1)
    k = 0
    weights = []
    for u in inside:
        for x, w in net.neighbors(u).items():
            if x not in inside:
                k += 1
                weights.append(w)
    outer = sorted(view.ring(level))
    n = len(outer)
    if n < 2:
        c = 0.0
    else:
        outer_set = set(outer)
        links = sum(1 for x in outer for y in net.neighbors(x) if y in outer_set) // 2
        c = links / (n * (n - 1) / 2)
    return k, math.fsum(weights), c


def locality_index(k1: float, k2: float) -> float:
    if k1 + k2 <= 0:
        return math.nan
    return k1 / (k1 + k2)


def topo_vector(
    net: CollabNetwork, v: int, comp: ComponentLabeling | None = None, weighted: bool = False
) -> TopoVector:
    comp = comp or components(net)
    k1 = degree(net, v)
    kn_mean, kn_std, sn_mean, sn_std = neighborhood_stats(net, v)
    view = hierarchy(net, v, 3)
    k2, s2, c2 = hierarchical_measures(net, view, 2)
    k3, s3, c3 = hierarchical_measures(net, view, 3)
    return TopoVector(
        k1=float(k1),
        s1=strength(net, v),
        kn_mean=kn_mean,
        kn_std=kn_std,
        sn_mean=sn_mean,
        sn_std=sn_std,
        c1=clustering(net, v),
        l=avg_shortest_path(net, v, comp, weighted),
        b=betweenness(net, v, comp, weighted),
        k2=float(k2),
        k3=float(k3),
        s2=s2,
        s3=s3,
        c2=c2,
        c3=c3,
        loc=locality_index(k1, k2),
    )


def write_feature_csv(
    rows: Iterable[tuple[str, TopoVector]], stream: IO[str], fields: Sequence[str] = ALL_FIELDS
) -> None:
    """One row per node, ``NA`` for unavailable values."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["node", *fields])
    for label, vec in rows:
        writer.writerow([label, *("NA" if not vec.available(f) else repr(getattr(vec, f)) for f in fields)])
