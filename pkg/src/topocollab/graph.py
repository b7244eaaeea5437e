"""Weighted collaboration network with per-paper persona splitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import networkx as nx
import numpy as np

from .corpus import PaperRecord


@dataclass
class CollabNetwork:
    """Undirected weighted co-authorship graph.

    Nodes are integer ids indexing ``labels``. Every occurrence of the disputed
    alias is its own node (a *persona*); every other alias is a single node
    merged across papers.

    ``weights`` maps canonical ``(i, j)`` pairs with ``i < j`` to the summed
    edge strength ``sum_p 1/|p|`` over the papers ``p`` the two co-author.
    """

    labels: tuple[str, ...]
    weights: dict[tuple[int, int], float]
    persona_index: dict[int, tuple[str, str | None]] = field(default_factory=dict)
    disputed: str | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        adj: list[dict[int, float]] = [{} for _ in self.labels]
        for (i, j), w in self.weights.items():
            adj[i][j] = w
            adj[j][i] = w
        self._adj = adj
        self.index = {label: i for i, label in enumerate(self.labels)}

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def neighbors(self, v: int) -> dict[int, float]:
        """Neighbor id -> edge weight."""
        return self._adj[v]

    def weight(self, i: int, j: int) -> float:
        return self._adj[i].get(j, 0.0)

    def is_persona(self, v: int) -> bool:
        return v in self.persona_index

    def persona_nodes(self) -> list[int]:
        return sorted(self.persona_index)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense binary adjacency; meant for small graphs and checks."""
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=np.int64)
        for i, j in self.weights:
            a[i, j] = a[j, i] = 1
        return a

    def to_networkx(self) -> nx.Graph:
        g = self._cache.get("nx")
        if g is None:
            g = nx.Graph()
            g.add_nodes_from(range(self.n_nodes))
            g.add_edges_from((i, j, {"weight": w, "cost": 1.0 / w}) for (i, j), w in self.weights.items())
            self._cache["nx"] = g
        return g


@dataclass(frozen=True)
class ComponentLabeling:
    component_of: tuple[int, ...]
    component_sizes: tuple[int, ...]

    def size_of(self, v: int) -> int:
        return self.component_sizes[self.component_of[v]]

    def members(self, index: int) -> list[int]:
        return [v for v, c in enumerate(self.component_of) if c == index]


def persona_label(alias: str, paper_id: str) -> str:
    return f"{alias}@{paper_id}"


def build_network(corpus: Sequence[PaperRecord], disputed: str | None) -> CollabNetwork:
    """Build the collaboration network, splitting ``disputed`` into personas.

    Node ids follow first appearance in input order. Pass ``disputed=None`` to
    merge every alias.
    """
    if disputed is not None and not any(disputed in rec.aliases for rec in corpus):
        raise ValueError(f"disputed alias {disputed!r} does not occur in the corpus")

    labels: list[str] = []
    index: dict[str, int] = {}
    persona_index: dict[int, tuple[str, str | None]] = {}
    weights: dict[tuple[int, int], float] = {}

    def node_for(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for rec in corpus:
        ids = []
        for pos, alias in enumerate(rec.aliases):
            if alias == disputed:
                v = node_for(persona_label(alias, rec.paper_id))
                persona_index[v] = (rec.paper_id, None if rec.entities is None else rec.entities[pos])
            else:
                v = node_for(alias)
            ids.append(v)
        share = 1.0 / len(ids)
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                key = (ids[a], ids[b]) if ids[a] < ids[b] else (ids[b], ids[a])
                weights[key] = weights.get(key, 0.0) + share

    return CollabNetwork(tuple(labels), weights, persona_index, disputed)


def components(net: CollabNetwork) -> ComponentLabeling:
    """Connected components, indexed in order of their smallest node id."""
    cached = net._cache.get("components")
    if cached is not None:
        return cached
    component_of = [-1] * net.n_nodes
    sizes = []
    for start in range(net.n_nodes):
        if component_of[start] != -1:
            continue
        label = len(sizes)
        component_of[start] = label
        stack = [start]
        count = 0
        while stack:
            v = stack.pop()
            count += 1
            for u in net.neighbors(v):
                if component_of[u] == -1:
                    component_of[u] = label
                    stack.append(u)
        sizes.append(count)
    result = ComponentLabeling(tuple(component_of), tuple(sizes))
    net._cache["components"] = result
    return result


def write_edge_list(net: CollabNetwork, stream: IO[str]) -> None:
    """Dump the network as a node table followed by a tab-separated edge list."""
    stream.write("# nodes\n")
    for i, label in enumerate(net.labels):
        kind = "persona" if net.is_persona(i) else "author"
        stream.write(f"{i}\t{label}\t{kind}\n")
    stream.write("# edges\n")
    for (i, j) in sorted(net.weights):
        stream.write(f"{i}\t{j}\t{net.weights[(i, j)]!r}\n")


def read_edge_list(stream: IO[str]) -> CollabNetwork:
    labels: list[str] = []
    personas: dict[int, tuple[str, str | None]] = {}
    weights: dict[tuple[int, int], float] = {}
    section = None
    for line in stream:
        line = line.rstrip("\n")
        if line.startswith("# "):
            section = line[2:]
            continue
        if not line:
            continue
        parts = line.split("\t")
        if section == "nodes":
            labels.append(parts[1])
            if parts[2] == "persona":
                personas[int(parts[0])] = (parts[1].rsplit("@", 1)[-1], None)
        elif section == "edges":
            weights[(int(parts[0]), int(parts[1]))] = float(parts[2])
    return CollabNetwork(tuple(labels), weights, personas)
