"""Bibliographic corpus loading and homonym case extraction.

Two input formats are supported:

* ``jsonl``: one object per line, ``{"paper_id": str, "aliases": [str],
  "entities": [str]}`` (``entities`` optional).
* ``csv``: columns ``paper_id``, ``aliases`` and optionally ``entities``,
  list fields joined with ``;``.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

FORMATS = ("jsonl", "csv")
LIST_SEP = ";"


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""

    def __init__(self, message: str, line: int | None = None, paper_id: str | None = None):
        self.line = line
        self.paper_id = paper_id
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if paper_id is not None:
            prefix.append(f"paper {paper_id!r}")
        super().__init__(f"{', '.join(prefix)}: {message}" if prefix else message)


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    aliases: tuple[str, ...]
    entities: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.aliases:
            raise CorpusError("paper has no aliases", paper_id=self.paper_id)
        if len(set(self.aliases)) != len(self.aliases):
            raise CorpusError("duplicate alias within paper", paper_id=self.paper_id)
        if self.entities is not None and len(self.entities) != len(self.aliases):
            raise CorpusError(
                f"{len(self.aliases)} aliases but {len(self.entities)} entities",
                paper_id=self.paper_id,
            )

    @property
    def n_authors(self) -> int:
        return len(self.aliases)


@dataclass(frozen=True)
class AmbiguousCase:
    """One alias shared by several gold entities.

    ``personas`` lists every ``(paper_id, entity)`` occurrence of the alias,
    sorted by paper id.
    """

    alias: str
    personas: tuple[tuple[str, str], ...]
    classes: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(sorted({e for _, e in self.personas})))

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def n_personas(self) -> int:
        return len(self.personas)

    def class_sizes(self) -> dict[str, int]:
        sizes = dict.fromkeys(self.classes, 0)
        for _, entity in self.personas:
            sizes[entity] += 1
        return sizes


def _record(paper_id, aliases, entities, line):
    if not isinstance(paper_id, str) or not paper_id.strip():
        raise CorpusError("missing or non-string paper_id", line=line)
    if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
        raise CorpusError("aliases must be a list of strings", line=line, paper_id=paper_id)
    if entities is not None and (
        not isinstance(entities, list) or not all(isinstance(e, str) for e in entities)
    ):
        raise CorpusError("entities must be a list of strings", line=line, paper_id=paper_id)
    try:
        return PaperRecord(
            paper_id.strip(),
            tuple(a.strip() for a in aliases),
            None if entities is None else tuple(e.strip() for e in entities),
        )
    except CorpusError as exc:
        raise CorpusError(str(exc).split(": ", 1)[-1], line=line, paper_id=paper_id) from None


def _split(cell: str) -> list[str]:
    return [part for part in cell.split(LIST_SEP)] if cell.strip() else []


def load_corpus(source: IO[bytes] | IO[str] | bytes | str, format: str = "jsonl") -> list[PaperRecord]:
    """Parse a corpus from a byte/text stream (or raw bytes/str) in input order."""
    if format not in FORMATS:
        raise CorpusError(f"unknown format {format!r}; expected one of {FORMATS}")
    if isinstance(source, (bytes, str)):
        data = source
    else:
        data = source.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data

    records = []
    lines = []
    if format == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", line=lineno) from None
            if not isinstance(obj, dict):
                raise CorpusError("expected a JSON object", line=lineno)
            records.append(_record(obj.get("paper_id"), obj.get("aliases"), obj.get("entities"), lineno))
            lines.append(lineno)
    else:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            return []
        missing = {"paper_id", "aliases"} - set(reader.fieldnames)
        if missing:
            raise CorpusError(f"missing CSV columns {sorted(missing)}", line=1)
        has_entities = "entities" in reader.fieldnames
        for row in reader:
            lineno = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise CorpusError("wrong number of CSV fields", line=lineno)
            entities = _split(row["entities"]) if has_entities and row["entities"].strip() else None
            records.append(_record(row["paper_id"], _split(row["aliases"]), entities, lineno))
            lines.append(lineno)
    seen = set()
    for rec, lineno in zip(records, lines):
        if rec.paper_id in seen:
            raise CorpusError("duplicate paper_id", line=lineno, paper_id=rec.paper_id)
        seen.add(rec.paper_id)
    return records


def dump_corpus(records: Iterable[PaperRecord], stream: IO[str], format: str = "jsonl") -> None:
    if format not in FORMATS:
        raise CorpusError(f"unknown format {format!r}; expected one of {FORMATS}")
    records = list(records)
    if format == "jsonl":
        for rec in records:
            obj = {"paper_id": rec.paper_id, "aliases": list(rec.aliases)}
            if rec.entities is not None:
                obj["entities"] = list(rec.entities)
            stream.write(json.dumps(obj, ensure_ascii=False) + "\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    with_entities = any(rec.entities is not None for rec in records)
    writer.writerow(["paper_id", "aliases", "entities"] if with_entities else ["paper_id", "aliases"])
    for rec in records:
        row = [rec.paper_id, LIST_SEP.join(rec.aliases)]
        if with_entities:
            row.append(LIST_SEP.join(rec.entities) if rec.entities is not None else "")
        writer.writerow(row)


def extract_ambiguous_cases(corpus: Sequence[PaperRecord]) -> list[AmbiguousCase]:
    """Return one case per alias that names two or more gold entities."""
    occurrences: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for rec in corpus:
        if rec.entities is None:
            raise CorpusError("gold standard required", paper_id=rec.paper_id)
        for alias, entity in zip(rec.aliases, rec.entities):
            occurrences[alias].append((rec.paper_id, entity))

    cases = []
    for alias in sorted(occurrences):
        personas = occurrences[alias]
        if len({e for _, e in personas}) >= 2:
            cases.append(AmbiguousCase(alias, tuple(sorted(personas))))
    return cases
