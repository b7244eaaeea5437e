"""Synthetic corpora with planted homonyms.

Every corpus grows around a connected *core* community of authors. One alias
is shared by ``n_entities`` gold entities, each writing ``papers_per_entity``
papers. Modes:

``disjoint-collaborators``
    Each entity draws its co-authors from its own small pool, so the
    collaborative vectors separate the entities. Pools attach to the core
    identically, so the topology carries no signal.
``shared-collaborators-distinct-topology``
    Every paper has two one-off co-authors, so collaborative vectors are
    exchangeable across entities. Entity 0's co-authors attach to the core;
    entity ``e`` attaches at the end of a chain of ``chain_step * e`` nodes.
    Local measurements coincide and only path-based ones differ.
``noise``
    As the previous mode, but every entity attaches to the core, so neither
    strategy has signal.

:func:`generate_suite` stacks several such corpora, one ambiguous alias each.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import PaperRecord

MODES = ("disjoint-collaborators", "shared-collaborators-distinct-topology", "noise")
_SHORT = {"disjoint-collaborators": "disjoint", "shared-collaborators-distinct-topology": "topology", "noise": "noise"}


@dataclass(frozen=True)
class SynthSpec:
    mode: str = "disjoint-collaborators"
    n_entities: int = 2
    papers_per_entity: int = 10
    alias: str = "J. Doe"
    core_size: int = 30
    core_papers: int = 40
    pool_size: int = 4
    chain_step: int = 4

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.n_entities < 2:
            raise ValueError("n_entities must be >= 2")
        if self.papers_per_entity < 1:
            raise ValueError("papers_per_entity must be >= 1")
        if self.core_size < 3:
            raise ValueError("core_size must be >= 3")
        if self.pool_size < 2:
            raise ValueError("pool_size must be >= 2")
        if self.chain_step < 1:
            raise ValueError("chain_step must be >= 1")


class _Builder:
    def __init__(self):
        self.records: list[PaperRecord] = []

    def paper(self, authors):
        pid = f"P{len(self.records) + 1:05d}"
        aliases = tuple(a for a, _ in authors)
        entities = tuple(e for _, e in authors)
        self.records.append(PaperRecord(pid, aliases, entities))


def _solo(name):
    return (name, name)


def generate_corpus(spec: SynthSpec, seed: int = 0) -> list[PaperRecord]:
    rng = np.random.default_rng(seed)
    b = _Builder()
    core = [f"core-{i:03d}" for i in range(spec.core_size)]
    for i in range(spec.core_size):
        b.paper([_solo(core[i]), _solo(core[(i + 1) % spec.core_size])])
    for _ in range(spec.core_papers):
        trio = rng.choice(spec.core_size, size=3, replace=False)
        b.paper([_solo(core[i]) for i in sorted(trio)])

    entities = [f"{spec.alias} [E{e + 1}]" for e in range(spec.n_entities)]

    if spec.mode == "disjoint-collaborators":
        pools = []
        for e in range(spec.n_entities):
            pool = [f"pool-{e + 1}-{k}" for k in range(spec.pool_size)]
            for name in pool:
                b.paper([_solo(name), _solo(core[int(rng.integers(spec.core_size))])])
            pools.append(pool)
        for n in range(spec.papers_per_entity):
            for e in range(spec.n_entities):
                pair = rng.choice(spec.pool_size, size=2, replace=False)
                b.paper([(spec.alias, entities[e])] + [_solo(pools[e][k]) for k in sorted(pair)])
        return b.records

    anchors = []
    for e in range(spec.n_entities):
        if spec.mode == "noise" or e == 0:
            anchors.append(None)
            continue
        chain = [f"chain-{e + 1}-{k}" for k in range(spec.chain_step * e)]
        b.paper([_solo(core[int(rng.integers(spec.core_size))]), _solo(chain[0])])
        for a, c in zip(chain, chain[1:]):
            b.paper([_solo(a), _solo(c)])
        anchors.append(chain[-1])

    fresh = 0
    for n in range(spec.papers_per_entity):
        for e in range(spec.n_entities):
            names = [f"co-{fresh + 1:05d}", f"co-{fresh + 2:05d}"]
            fresh += 2
            b.paper([(spec.alias, entities[e])] + [_solo(x) for x in names])
            for x in names:
                anchor = anchors[e] if anchors[e] is not None else core[int(rng.integers(spec.core_size))]
                b.paper([_solo(x), _solo(anchor)])
    return b.records


def generate_suite(
    modes: tuple[str, ...] = MODES, seeds: tuple[int, ...] = (0, 1, 2), **spec_fields
) -> list[PaperRecord]:
    """One corpus per (mode, seed), concatenated.

    Every part gets its own alias, ``"<alias> (<mode>-<seed>)"``, and every
    other name and paper id is prefixed by the same tag, so the parts never
    share nodes.
    """
    base = SynthSpec(**spec_fields)
    records = []
    for mode in modes:
        for seed in seeds:
            tag = f"{_SHORT[mode]}-{seed}" if mode in _SHORT else mode
            spec = SynthSpec(**{**spec_fields, "mode": mode, "alias": f"{base.alias} ({tag})"})
            for r in generate_corpus(spec, seed):
                aliases = tuple(a if a == spec.alias else f"{tag}:{a}" for a in r.aliases)
                entities = tuple(e if e.startswith(spec.alias) else f"{tag}:{e}" for e in r.entities)
                records.append(PaperRecord(f"{tag}:{r.paper_id}", aliases, entities))
    return records
