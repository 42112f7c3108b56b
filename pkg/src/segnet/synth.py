"""Synthetic network generators with planted structure, for oracle testing.

Both generators return datasets in the same shape the ingest layer produces,
so the whole analysis pipeline runs on them unchanged.  Identical seeds give
bit-identical datasets.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .attributes import (
    ATTRIBUTE_NAMES,
    CATEGORICAL_ATTRIBUTES,
    NUMERIC_ATTRIBUTES,
    AttributeTable,
    encode_category,
)
from .community import Partition
from .dyadic import FeatureSpec
from .graph import build_graph
from .ingest import VillageDataset

__all__ = [
    "AttributedSbmConfig",
    "generate_attribute_sbm",
    "generate_dyad_sample",
]

# Mean degree at which an Erdos-Renyi giant component is expected to cover
# half the nodes (solution of s = 1 - exp(-c s) at s = 1/2).
_HALF_COVERAGE_MEAN_DEGREE = 2.0 * math.log(2.0)


@dataclass(frozen=True)
class AttributedSbmConfig:
    """Stochastic block model with block-linked attribute values.

    ``attribute_rule`` gives, per block, either a single category value or a
    category -> probability mapping for ``attribute_name``.
    ``extra_attribute_laws`` optionally draws further attributes iid across
    nodes.  ``missing_rate`` blanks each generated attribute value
    independently.
    """

    block_sizes: tuple[int, ...]
    p_in: float
    p_out: float
    attribute_rule: tuple[str | Mapping[str, float], ...]
    seed: int
    attribute_name: str = "caste"
    village_id: str = "sbm"
    extra_attribute_laws: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    missing_rate: float = 0.0

    def __post_init__(self) -> None:
        if not self.block_sizes or any(s < 1 for s in self.block_sizes):
            raise ValueError("block sizes must be positive")
        if not (0.0 <= self.p_out <= self.p_in <= 1.0):
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if len(self.attribute_rule) != len(self.block_sizes):
            raise ValueError("attribute_rule must give one entry per block")
        if not (0.0 <= self.missing_rate < 1.0):
            raise ValueError("missing_rate must be in [0, 1)")


def _draw_categorical(
    rng: np.random.Generator, law: Mapping[str, float], size: int
) -> list[str]:
    names = list(law)
    probs = np.asarray([law[k] for k in names], dtype=float)
    if probs.min() < 0 or not math.isclose(float(probs.sum()), 1.0, abs_tol=1e-9):
        raise ValueError("category probabilities must be non-negative and sum to 1")
    picks = rng.choice(len(names), size=size, p=probs / probs.sum())
    return [names[k] for k in picks.tolist()]


def _store_attribute(
    columns: dict[str, np.ndarray], attr: str, raw_values: Sequence[str], idx: np.ndarray
) -> None:
    if attr in CATEGORICAL_ATTRIBUTES:
        codes = np.array([encode_category(attr, v) for v in raw_values], dtype=np.int64)
        columns[attr][idx] = codes
    elif attr in NUMERIC_ATTRIBUTES:
        values = np.array([float(int(v)) for v in raw_values])
        if values.min() < 0:
            raise ValueError(f"{attr} values must be non-negative")
        columns[attr][idx] = values
    else:
        raise ValueError(f"unknown attribute {attr!r}")


def _blank_missing(
    rng: np.random.Generator, columns: dict[str, np.ndarray], attr: str, rate: float
) -> None:
    if rate <= 0.0:
        return
    n = columns[attr].size
    blank = rng.random(n) < rate
    if attr in CATEGORICAL_ATTRIBUTES:
        columns[attr][blank] = -1
    else:
        columns[attr][blank] = np.nan


def _empty_columns(n: int) -> dict[str, np.ndarray]:
    cols: dict[str, np.ndarray] = {}
    for attr in ATTRIBUTE_NAMES:
        if attr in CATEGORICAL_ATTRIBUTES:
            cols[attr] = np.full(n, -1, dtype=np.int64)
        else:
            cols[attr] = np.full(n, np.nan)
    return cols


def generate_attribute_sbm(
    config: AttributedSbmConfig,
) -> tuple[VillageDataset, Partition]:
    """Sample an attributed stochastic block model.

    Returns the dataset together with the planted block partition on the
    generated graph.  Warns (never raises) when the expected mean degree is
    low enough that the largest component likely covers under half the nodes.
    """
    rng = np.random.default_rng(config.seed)
    sizes = np.asarray(config.block_sizes, dtype=np.int64)
    n = int(sizes.sum())
    block_of = np.repeat(np.arange(sizes.size), sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)])

    expected_degree = float(
        (
            sizes / n * ((sizes - 1) * config.p_in + (n - sizes) * config.p_out)
        ).sum()
    )
    if expected_degree < _HALF_COVERAGE_MEAN_DEGREE:
        warnings.warn(
            f"expected mean degree {expected_degree:.3f} is below {_HALF_COVERAGE_MEAN_DEGREE:.3f}; "
            "the largest component will likely cover under half the nodes",
            stacklevel=2,
        )

    width = max(1, len(str(n - 1)))
    node_ids = tuple(f"n{i:0{width}d}" for i in range(n))
    edges: list[tuple[str, str]] = []
    for a in range(sizes.size):
        lo_a, hi_a = int(starts[a]), int(starts[a + 1])
        iu, ju = np.triu_indices(hi_a - lo_a, k=1)
        if iu.size:
            hit = rng.random(iu.size) < config.p_in
            for i, j in zip((iu[hit] + lo_a).tolist(), (ju[hit] + lo_a).tolist()):
                edges.append((node_ids[i], node_ids[j]))
        for b in range(a + 1, sizes.size):
            lo_b, hi_b = int(starts[b]), int(starts[b + 1])
            hit = rng.random((hi_a - lo_a, hi_b - lo_b)) < config.p_out
            ii, jj = np.nonzero(hit)
            for i, j in zip((ii + lo_a).tolist(), (jj + lo_b).tolist()):
                edges.append((node_ids[i], node_ids[j]))

    columns = _empty_columns(n)
    for b, rule in enumerate(config.attribute_rule):
        idx = np.arange(int(starts[b]), int(starts[b + 1]))
        if isinstance(rule, str):
            values = [rule] * idx.size
        else:
            values = _draw_categorical(rng, rule, idx.size)
        _store_attribute(columns, config.attribute_name, values, idx)
    for attr, law in config.extra_attribute_laws.items():
        if attr == config.attribute_name:
            raise ValueError(f"{attr!r} is already driven by the block rule")
        if attr in CATEGORICAL_ATTRIBUTES:
            _store_attribute(columns, attr, _draw_categorical(rng, law, n), np.arange(n))
        elif attr in NUMERIC_ATTRIBUTES:
            _store_attribute(columns, attr, _draw_categorical(rng, law, n), np.arange(n))
        else:
            raise ValueError(f"unknown attribute {attr!r}")
    _blank_missing(rng, columns, config.attribute_name, config.missing_rate)
    for attr in config.extra_attribute_laws:
        _blank_missing(rng, columns, attr, config.missing_rate)

    graph, _ = build_graph(edges, node_ids=node_ids)
    table = AttributeTable(node_ids=node_ids, **columns)
    dataset = VillageDataset(
        village_id=config.village_id,
        graph=graph,
        attributes=table,
        layer_edges={"sbm": tuple(sorted(set(edges)))},
    )
    planted = Partition.from_assignment(graph, block_of + 1)
    return dataset, planted


def generate_dyad_sample(
    beta0: float,
    betas: Mapping[str, float],
    feature_law: Mapping[str, Mapping[str, float]],
    n_nodes: int,
    seed: int,
    village_id: str = "dyadic",
    spec: FeatureSpec | None = None,
) -> VillageDataset:
    """Sample a network whose ties follow the dyadic logistic model exactly.

    Each node draws a value per attribute from ``feature_law``; every
    unordered pair then ties with probability
    ``logistic(beta0 + sum_d beta_d x_d)`` where the features come from
    ``spec`` (default: match indicators on the law's attributes).  Raises if
    any tie probability saturates to 0 or 1 in floating point.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    missing_laws = [a for a in betas if a not in feature_law]
    if missing_laws:
        raise ValueError(f"no feature law for attribute(s): {', '.join(missing_laws)}")
    rng = np.random.default_rng(seed)
    width = max(1, len(str(n_nodes - 1)))
    node_ids = tuple(f"n{i:0{width}d}" for i in range(n_nodes))

    columns = _empty_columns(n_nodes)
    for attr, law in feature_law.items():
        _store_attribute(columns, attr, _draw_categorical(rng, law, n_nodes), np.arange(n_nodes))
    table = AttributeTable(node_ids=node_ids, **columns)

    if spec is None:
        from .dyadic import FeatureEncoding

        spec = FeatureSpec({attr: FeatureEncoding("match") for attr in betas})
    names = [a for a in spec.names if a in betas]
    if set(names) != set(betas):
        raise ValueError("spec must cover exactly the attributes with coefficients")
    beta_vec = np.array([betas[a] for a in names])
    feats = []
    for attr in names:
        enc = spec.encodings[attr]
        if enc.kind == "match":
            feats.append(("match", table.labels(attr, enc.bins)))
        else:
            values = (
                table.labels(attr, enc.bins).astype(float)
                if enc.bins is not None
                else table.values(attr)
            )
            feats.append(("difference", values))

    iu, ju = np.triu_indices(n_nodes, k=1)
    cols = []
    for (kind, values) in feats:
        if kind == "match":
            cols.append((values[iu] == values[ju]).astype(float))
        else:
            cols.append(np.abs(values[iu] - values[ju]))
    X = np.column_stack(cols) if cols else np.empty((iu.size, 0))
    prob = expit(beta0 + X @ beta_vec)
    if prob.min() <= 0.0 or prob.max() >= 1.0:
        raise ValueError("tie probabilities saturate at 0 or 1; rescale the coefficients")
    hit = rng.random(prob.size) < prob
    edges = [
        (node_ids[i], node_ids[j])
        for i, j in zip(iu[hit].tolist(), ju[hit].tolist())
    ]

    graph, _ = build_graph(edges, node_ids=node_ids)
    return VillageDataset(
        village_id=village_id,
        graph=graph,
        attributes=table,
        layer_edges={"dyads": tuple(sorted(set(edges)))},
    )
