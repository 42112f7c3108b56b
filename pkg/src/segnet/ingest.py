"""Village dataset I/O: relation edge layers plus a nodal covariate table.

Canonical on-disk layout for one village (all CSV, UTF-8):

* one or more relation layer files with header ``source,target``, one
  undirected edge per row;
* ``attributes.csv`` with header
  ``node_id,sex,age,religion,caste,education,workflag,savings`` where an
  empty string means missing;
* optionally ``nodes.csv`` (header ``node_id``) fixing the node universe,
  which is how isolated survey respondents stay part of the network.

An adapter converts square 0/1 adjacency matrices into edge lists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .attributes import (
    ATTRIBUTE_NAMES,
    CATEGORICAL_ATTRIBUTES,
    AttributeTable,
    encode_category,
)
from .graph import UndirectedGraph, build_graph

__all__ = [
    "IngestError",
    "IngestConfig",
    "VillageDataset",
    "adapt_adjacency_matrix",
    "load_village",
    "save_village",
]

_ATTRIBUTE_HEADER = ("node_id",) + ATTRIBUTE_NAMES
_RESERVED_FILE_STEMS = {"attributes", "nodes"}


class IngestError(ValueError):
    """Malformed input file; the message carries file and line context."""


@dataclass(frozen=True)
class IngestConfig:
    """Loading options.

    ``nodes_file`` fixes the node universe explicitly; otherwise it is the
    union of edge endpoints.  ``coerce_unknown_categories`` loads categorical
    values outside the declared sets as missing instead of failing, which
    real survey exports occasionally need.
    """

    village_id: str | None = None
    nodes_file: str | Path | None = None
    coerce_unknown_categories: bool = False


@dataclass(frozen=True)
class VillageDataset:
    """One village: union graph, covariates, and the per-layer edge lists."""

    village_id: str
    graph: UndirectedGraph
    attributes: AttributeTable
    layer_edges: Mapping[str, tuple[tuple[str, str], ...]]
    unmatched_attribute_ids: tuple[str, ...] = ()

    @property
    def node_ids(self) -> tuple[str, ...]:
        return self.attributes.node_ids

    @property
    def relation_layers(self) -> dict[str, int]:
        """Relation name -> number of distinct undirected pairs in that layer."""
        return {name: len(pairs) for name, pairs in self.layer_edges.items()}

    def equals(self, other: "VillageDataset") -> bool:
        return (
            self.village_id == other.village_id
            and self.graph.equals(other.graph)
            and self.attributes.equals(other.attributes)
            and dict(self.layer_edges) == dict(other.layer_edges)
            and self.unmatched_attribute_ids == other.unmatched_attribute_ids
        )


def _read_edge_file(path: Path, universe: frozenset[str] | None = None) -> tuple[tuple[str, str], ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["source", "target"]:
            raise IngestError(f"{path}:1: expected header 'source,target'")
        pairs: set[tuple[str, str]] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise IngestError(f"{path}:{lineno}: expected 2 fields, found {len(row)}")
            a, b = row[0].strip(), row[1].strip()
            if not a or not b:
                raise IngestError(f"{path}:{lineno}: empty node id")
            if universe is not None:
                for nid in (a, b):
                    if nid not in universe:
                        raise IngestError(
                            f"{path}:{lineno}: edge references node id {nid!r} "
                            "outside the declared node list"
                        )
            pairs.add((a, b) if a <= b else (b, a))
    return tuple(sorted(pairs))


def _read_nodes_file(path: Path) -> tuple[str, ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["node_id"]:
            raise IngestError(f"{path}:1: expected header 'node_id'")
        ids: list[str] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 1:
                raise IngestError(f"{path}:{lineno}: expected 1 field, found {len(row)}")
            nid = row[0].strip()
            if nid in seen:
                raise IngestError(f"{path}:{lineno}: duplicate node id {nid!r}")
            seen.add(nid)
            ids.append(nid)
    return tuple(ids)


def _parse_numeric(text: str, attr: str, path: Path, lineno: int) -> float:
    if text == "":
        return float("nan")
    try:
        value = int(text)
    except ValueError:
        raise IngestError(f"{path}:{lineno}: invalid {attr} value {text!r}") from None
    if value < 0:
        raise IngestError(f"{path}:{lineno}: negative {attr} value {value}")
    return float(value)


def _parse_categorical(text: str, attr: str, path: Path, lineno: int, coerce: bool) -> int:
    if text == "":
        return -1
    try:
        return encode_category(attr, text)
    except ValueError:
        if coerce:
            return -1
        raise IngestError(f"{path}:{lineno}: unknown {attr} value {text!r}") from None


def _read_attribute_file(
    path: Path, coerce: bool
) -> dict[str, dict[str, float | int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != _ATTRIBUTE_HEADER:
            raise IngestError(
                f"{path}:1: expected header {','.join(_ATTRIBUTE_HEADER)!r}"
            )
        records: dict[str, dict[str, float | int]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(_ATTRIBUTE_HEADER):
                raise IngestError(
                    f"{path}:{lineno}: expected {len(_ATTRIBUTE_HEADER)} fields, found {len(row)}"
                )
            nid = row[0].strip()
            if not nid:
                raise IngestError(f"{path}:{lineno}: empty node id")
            if nid in records:
                raise IngestError(f"{path}:{lineno}: duplicate node id {nid!r}")
            rec: dict[str, float | int] = {}
            for attr, text in zip(ATTRIBUTE_NAMES, (t.strip() for t in row[1:])):
                if attr in CATEGORICAL_ATTRIBUTES:
                    rec[attr] = _parse_categorical(text, attr, path, lineno, coerce)
                else:
                    rec[attr] = _parse_numeric(text, attr, path, lineno)
            records[nid] = rec
    return records


def load_village(
    edge_files: Sequence[str | Path],
    attribute_file: str | Path,
    config: IngestConfig = IngestConfig(),
) -> VillageDataset:
    """Load one village from its relation layer files and covariate table.

    The union graph is independent of layer file order.  Nodes missing from
    the attribute file load with every field missing; attribute rows for ids
    outside the node universe are reported via ``unmatched_attribute_ids``.
    """
    if not edge_files:
        raise IngestError("at least one edge file is required")
    attribute_path = Path(attribute_file)
    if config.nodes_file is not None:
        node_ids: Sequence[str] | None = _read_nodes_file(Path(config.nodes_file))
        universe = frozenset(node_ids)
    else:
        node_ids = None
        universe = None

    layers: dict[str, tuple[tuple[str, str], ...]] = {}
    for ef in edge_files:
        p = Path(ef)
        name = p.stem
        if name in layers:
            raise IngestError(f"duplicate relation layer name {name!r}")
        layers[name] = _read_edge_file(p, universe)

    union: set[tuple[str, str]] = set()
    for pairs in layers.values():
        union.update(pairs)
    union_pairs = sorted(union)
    try:
        graph, index = build_graph(union_pairs, node_ids=node_ids)
    except ValueError as exc:
        raise IngestError(str(exc)) from None
    ordered_ids = sorted(index, key=index.get)  # type: ignore[arg-type]

    records = _read_attribute_file(attribute_path, config.coerce_unknown_categories)
    table = AttributeTable.empty(ordered_ids)
    columns = {name: np.array(getattr(table, name)) for name in ATTRIBUTE_NAMES}
    unmatched = []
    for nid, rec in records.items():
        pos = index.get(nid)
        if pos is None:
            unmatched.append(nid)
            continue
        for attr in ATTRIBUTE_NAMES:
            columns[attr][pos] = rec[attr]
    table = AttributeTable(node_ids=tuple(ordered_ids), **columns)

    village_id = config.village_id or attribute_path.parent.name or attribute_path.stem
    return VillageDataset(
        village_id=village_id,
        graph=graph,
        attributes=table,
        layer_edges=dict(sorted(layers.items())),
        unmatched_attribute_ids=tuple(sorted(unmatched)),
    )


def save_village(dataset: VillageDataset, directory: str | Path) -> Path:
    """Serialize a dataset to the canonical layout; re-loading round-trips."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name in dataset.layer_edges:
        if name in _RESERVED_FILE_STEMS:
            raise ValueError(f"relation layer name {name!r} is reserved")

    with open(out / "nodes.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id"])
        for nid in dataset.node_ids:
            writer.writerow([nid])

    table = dataset.attributes
    with open(out / "attributes.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_ATTRIBUTE_HEADER)
        for i, nid in enumerate(table.node_ids):
            row = [nid]
            for attr in ATTRIBUTE_NAMES:
                col = getattr(table, attr)
                if attr in CATEGORICAL_ATTRIBUTES:
                    code = int(col[i])
                    row.append("" if code < 0 else CATEGORICAL_ATTRIBUTES[attr][code])
                else:
                    v = float(col[i])
                    row.append("" if np.isnan(v) else str(int(v)))
            writer.writerow(row)

    for name, pairs in dataset.layer_edges.items():
        with open(out / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source", "target"])
            for a, b in pairs:
                writer.writerow([a, b])
    return out


def adapt_adjacency_matrix(matrix_file: str | Path) -> list[tuple[int, int]]:
    """Convert a square 0/1 adjacency matrix CSV into an edge list.

    The matrix is OR-symmetrized; one edge is emitted per upper-triangle
    entry.  Row/column indices double as node ids.
    """
    path = Path(matrix_file)
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise IngestError(f"{path}: cannot parse as a numeric matrix: {exc}") from None
    except OSError as exc:
        raise IngestError(f"{path}: {exc}") from None
    if mat.size == 0:
        raise IngestError(f"{path}: empty matrix")
    if mat.shape[0] != mat.shape[1]:
        raise IngestError(
            f"{path}: matrix is {mat.shape[0]}x{mat.shape[1]}, expected square"
        )
    values = np.unique(mat)
    if not np.isin(values, (0.0, 1.0)).all():
        bad = values[~np.isin(values, (0.0, 1.0))][0]
        raise IngestError(f"{path}: matrix entry {bad!r} outside {{0, 1}}")
    sym = np.triu(np.maximum(mat, mat.T), k=1)
    iu, ju = np.nonzero(sym)
    return [(int(i), int(j)) for i, j in zip(iu.tolist(), ju.tolist())]
