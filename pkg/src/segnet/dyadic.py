"""Dyad-level assortativity: similarity features, logistic fits, permutation nulls.

Every unordered pair of complete-case nodes becomes one observation whose
outcome is tie presence.  Discrete attributes contribute match indicators,
numeric ones absolute differences (optionally on binned values).  Pairs are
streamed in blocks so memory stays proportional to the block size rather
than the full dyad count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats
from scipy.special import expit

from .attributes import (
    CATEGORICAL_ATTRIBUTES,
    NUMERIC_ATTRIBUTES,
    AttributeTable,
    complete_case_mask,
)
from .graph import UndirectedGraph

__all__ = [
    "FeatureEncoding",
    "FeatureSpec",
    "DyadDesign",
    "FitOptions",
    "LogisticFit",
    "TieTriple",
    "SexPermutationResult",
    "build_dyad_design",
    "default_feature_spec",
    "fit_logistic",
    "sex_permutation_test",
    "degree_missingness_ttest",
]

_DEFAULT_BLOCK = 1 << 18


@dataclass(frozen=True)
class FeatureEncoding:
    """How one attribute turns into a dyad feature.

    ``match`` yields 1 when both endpoints carry the same (possibly binned)
    value; ``difference`` yields |v_i - v_j| and is only meaningful for
    numeric attributes.
    """

    kind: str = "match"
    bins: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("match", "difference"):
            raise ValueError(f"unknown encoding kind {self.kind!r}")


@dataclass(frozen=True)
class FeatureSpec:
    """Ordered attribute -> encoding mapping defining the dyad design columns."""

    encodings: Mapping[str, FeatureEncoding]

    def __post_init__(self) -> None:
        for attr, enc in self.encodings.items():
            if attr not in CATEGORICAL_ATTRIBUTES and attr not in NUMERIC_ATTRIBUTES:
                raise ValueError(f"unknown attribute {attr!r}")
            if enc.kind == "difference" and attr not in NUMERIC_ATTRIBUTES:
                raise ValueError(f"difference encoding requires a numeric attribute, got {attr!r}")
            if enc.bins is not None and attr not in NUMERIC_ATTRIBUTES:
                raise ValueError(f"bins only apply to numeric attributes, got {attr!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.encodings)

    def restrict(self, attrs: Sequence[str]) -> "FeatureSpec":
        return FeatureSpec({a: self.encodings[a] for a in attrs})


def default_feature_spec(
    age_bins: Sequence[float] | None = None,
    education_bins: Sequence[float] | None = None,
) -> FeatureSpec:
    """Match indicators on every attribute, with age and education binned."""
    from .attributes import DEFAULT_AGE_BINS, DEFAULT_EDUCATION_BINS

    age = tuple(age_bins) if age_bins is not None else DEFAULT_AGE_BINS
    edu = tuple(education_bins) if education_bins is not None else DEFAULT_EDUCATION_BINS
    return FeatureSpec(
        {
            "sex": FeatureEncoding("match"),
            "age": FeatureEncoding("match", age),
            "religion": FeatureEncoding("match"),
            "caste": FeatureEncoding("match"),
            "education": FeatureEncoding("match", edu),
            "workflag": FeatureEncoding("match"),
            "savings": FeatureEncoding("match"),
        }
    )


class DyadDesign:
    """All unordered complete-case node pairs with features and tie outcome.

    Rows are enumerated lazily in lexicographic pair order; ``iter_blocks``
    yields numpy blocks and ``rows`` yields individual tuples for small
    designs.
    """

    def __init__(
        self,
        node_index: np.ndarray,
        feature_names: tuple[str, ...],
        feature_kinds: tuple[str, ...],
        node_features: tuple[np.ndarray, ...],
        tie_keys: np.ndarray,
    ) -> None:
        self.node_index = node_index
        self.feature_names = feature_names
        self._kinds = feature_kinds
        self._node_features = node_features
        self._tie_keys = tie_keys

    @property
    def n_nodes(self) -> int:
        return int(self.node_index.size)

    @property
    def n_rows(self) -> int:
        k = self.n_nodes
        return k * (k - 1) // 2

    @property
    def n_ties(self) -> int:
        return int(self._tie_keys.size)

    def _materialize(self, ipos: np.ndarray, jpos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cols = []
        for kind, values in zip(self._kinds, self._node_features):
            if kind == "match":
                cols.append((values[ipos] == values[jpos]).astype(float))
            else:
                cols.append(np.abs(values[ipos] - values[jpos]))
        X = np.column_stack(cols) if cols else np.empty((ipos.size, 0))
        keys = ipos * self.n_nodes + jpos
        loc = np.searchsorted(self._tie_keys, keys)
        loc_clipped = np.minimum(loc, max(self._tie_keys.size - 1, 0))
        if self._tie_keys.size:
            y = (self._tie_keys[loc_clipped] == keys) & (loc < self._tie_keys.size)
        else:
            y = np.zeros(keys.size, dtype=bool)
        return X, y.astype(float)

    def iter_blocks(
        self, block_size: int = _DEFAULT_BLOCK
    ) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(i_positions, j_positions, X, y)`` blocks of at most ~block_size rows."""
        k = self.n_nodes
        buf_i: list[np.ndarray] = []
        buf_j: list[np.ndarray] = []
        count = 0
        for i in range(k - 1):
            j = np.arange(i + 1, k, dtype=np.int64)
            buf_i.append(np.full(j.size, i, dtype=np.int64))
            buf_j.append(j)
            count += j.size
            if count >= block_size:
                ipos = np.concatenate(buf_i)
                jpos = np.concatenate(buf_j)
                X, y = self._materialize(ipos, jpos)
                yield ipos, jpos, X, y
                buf_i, buf_j, count = [], [], 0
        if count:
            ipos = np.concatenate(buf_i)
            jpos = np.concatenate(buf_j)
            X, y = self._materialize(ipos, jpos)
            yield ipos, jpos, X, y

    def rows(self) -> Iterator[tuple[int, int, float, tuple[float, ...]]]:
        """Yield ``(i, j, y, features)`` with i, j in the original graph indexing."""
        for ipos, jpos, X, y in self.iter_blocks():
            orig_i = self.node_index[ipos]
            orig_j = self.node_index[jpos]
            for r in range(len(y)):
                yield int(orig_i[r]), int(orig_j[r]), float(y[r]), tuple(X[r].tolist())


def build_dyad_design(
    graph: UndirectedGraph, table: AttributeTable, spec: FeatureSpec
) -> DyadDesign:
    """Assemble the dyad design over complete-case nodes of ``graph``.

    Raises if fewer than two nodes are observed on every attribute in the
    spec.
    """
    if table.n != graph.node_count:
        raise ValueError("attribute table does not align with the graph")
    names = spec.names
    if not names:
        raise ValueError("feature spec is empty")
    mask = complete_case_mask(table, names)
    node_index = np.flatnonzero(mask)
    k = int(node_index.size)
    if k < 2:
        raise ValueError(f"need at least 2 complete-case nodes, found {k}")

    kinds = []
    node_features = []
    for attr in names:
        enc = spec.encodings[attr]
        kinds.append(enc.kind)
        if enc.kind == "match":
            node_features.append(table.labels(attr, enc.bins)[node_index].astype(np.int64))
        else:
            values = (
                table.labels(attr, enc.bins).astype(float)
                if enc.bins is not None
                else table.values(attr)
            )
            node_features.append(values[node_index])

    pos = np.full(graph.node_count, -1, dtype=np.int64)
    pos[node_index] = np.arange(k)
    pu = pos[graph.edge_u]
    pv = pos[graph.edge_v]
    keep = (pu >= 0) & (pv >= 0)
    a = np.minimum(pu[keep], pv[keep])
    b = np.maximum(pu[keep], pv[keep])
    tie_keys = np.sort(a * k + b)
    return DyadDesign(node_index, tuple(names), tuple(kinds), tuple(node_features), tie_keys)


@dataclass(frozen=True)
class FitOptions:
    """Newton/IRLS controls for the dyadic logistic model."""

    max_iter: int = 100
    tol: float = 1e-8
    block_size: int = _DEFAULT_BLOCK
    divergence_bound: float = 30.0


@dataclass(frozen=True)
class LogisticFit:
    """Maximum-likelihood logistic fit with Wald inference per feature."""

    feature_names: tuple[str, ...]
    beta0: float
    beta: np.ndarray
    intercept_se: float
    std_errors: np.ndarray
    odds_ratios: np.ndarray
    ci95: np.ndarray
    p_values: np.ndarray
    converged: bool
    n_iterations: int
    n_dyads: int
    n_ties: int
    diagnostic: str | None = None


def _accumulate(design: DyadDesign, beta: np.ndarray, block_size: int) -> tuple[np.ndarray, np.ndarray]:
    p1 = beta.size
    H = np.zeros((p1, p1))
    grad = np.zeros(p1)
    for _, _, X, y in design.iter_blocks(block_size):
        Xb = np.column_stack([np.ones(y.size), X])
        mu = expit(Xb @ beta)
        w = mu * (1.0 - mu)
        grad += Xb.T @ (y - mu)
        H += (Xb * w[:, None]).T @ Xb
    return H, grad


def fit_logistic(design: DyadDesign, options: FitOptions = FitOptions()) -> LogisticFit:
    """Fit tie probability on dyad features by Newton-Raphson (IRLS).

    Convergence means every coefficient moved by less than ``options.tol``
    in the last step.  Runaway coefficients (complete separation) and a
    singular information matrix return a fit flagged ``converged=False``
    with a diagnostic rather than raising.  A constant feature column is an
    error naming the attribute.
    """
    p = len(design.feature_names)
    if design.n_rows == 0:
        raise ValueError("empty dyad design")
    if design.n_ties == 0 or design.n_ties == design.n_rows:
        raise ValueError("dyad design needs both tied and untied pairs")

    mins = np.full(p, np.inf)
    maxs = np.full(p, -np.inf)
    for _, _, X, _ in design.iter_blocks(options.block_size):
        if p:
            mins = np.minimum(mins, X.min(axis=0))
            maxs = np.maximum(maxs, X.max(axis=0))
    constant = np.flatnonzero(mins == maxs)
    if constant.size:
        bad = ", ".join(design.feature_names[i] for i in constant.tolist())
        raise ValueError(f"constant dyad feature column for attribute(s): {bad}")

    beta = np.zeros(p + 1)
    converged = False
    diagnostic: str | None = None
    iteration = 0
    for iteration in range(1, options.max_iter + 1):
        H, grad = _accumulate(design, beta, options.block_size)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            diagnostic = "singular information matrix"
            break
        beta = beta + step
        if np.abs(beta).max() > options.divergence_bound:
            diagnostic = "coefficients diverging; data are likely completely separated"
            break
        if np.abs(step).max() < options.tol:
            converged = True
            break
    else:
        diagnostic = f"no convergence within {options.max_iter} iterations"

    H, _ = _accumulate(design, beta, options.block_size)
    try:
        covariance = np.linalg.inv(H)
        se = np.sqrt(np.diag(covariance))
    except np.linalg.LinAlgError:
        se = np.full(p + 1, np.nan)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = beta / se
        p_values = 2.0 * stats.norm.sf(np.abs(z))
        ci95 = np.column_stack(
            [np.exp(beta[1:] - 1.96 * se[1:]), np.exp(beta[1:] + 1.96 * se[1:])]
        )
    return LogisticFit(
        feature_names=design.feature_names,
        beta0=float(beta[0]),
        beta=beta[1:].copy(),
        intercept_se=float(se[0]),
        std_errors=se[1:].copy(),
        odds_ratios=np.exp(beta[1:]),
        ci95=ci95,
        p_values=p_values[1:].copy(),
        converged=converged,
        n_iterations=iteration,
        n_dyads=design.n_rows,
        n_ties=design.n_ties,
        diagnostic=diagnostic,
    )


class TieTriple(NamedTuple):
    """Per tie-type values in the order male-male, male-female, female-female."""

    mm: float
    mf: float
    ff: float


@dataclass(frozen=True)
class SexPermutationResult:
    """Constrained permutation null for sex-typed tie counts.

    Valid replicates keep each permuted group's mean degree within a relative
    tolerance of its empirical value; per-replicate mean degrees and counts
    are retained so the constraint is verifiable afterwards.
    """

    observed: TieTriple
    expected_mean: TieTriple
    ratio: TieTriple
    p_values: TieTriple
    verdicts: TieTriple
    n_replicates: int
    tolerance: float
    n_attempts: int
    male_mean_degree: float
    female_mean_degree: float
    male_degree_bounds: tuple[float, float]
    female_degree_bounds: tuple[float, float]
    replicate_male_mean_degrees: np.ndarray
    replicate_female_mean_degrees: np.ndarray
    replicate_counts: np.ndarray


def _mc_two_sided(values: np.ndarray, observed: float) -> float:
    r = values.size
    ge = int((values >= observed).sum())
    le = int((values <= observed).sum())
    return min(1.0, 2.0 * min(ge + 1, le + 1) / (r + 1))


def sex_permutation_test(
    graph: UndirectedGraph,
    table: AttributeTable,
    tolerance: float,
    target_replicates: int = 1000,
    seed: int = 0,
    max_attempts: int = 1_000_000,
    batch_size: int = 512,
) -> SexPermutationResult:
    """Mean-degree-constrained permutation test of sex-typed tie counts.

    Sex labels are permuted among sex-observed nodes only; a replicate
    counts when both permuted group mean degrees satisfy
    ``|mean*/mean - 1| <= tolerance``.  Two-sided Monte Carlo p-values use
    the doubled smaller tail with add-one correction, capped at 1.

    Raises on a single-sex network and when the valid-replicate acceptance
    rate is below 0.1% after ``max_attempts`` attempts.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if target_replicates < 1:
        raise ValueError("target_replicates must be at least 1")
    sex = table.labels("sex")
    if sex.shape != (graph.node_count,):
        raise ValueError("attribute table does not align with the graph")
    observed_idx = np.flatnonzero(sex >= 0)
    male = sex[observed_idx] == 0
    n_male = int(male.sum())
    n_female = int(observed_idx.size - n_male)
    if n_male == 0 or n_female == 0:
        raise ValueError("sex permutation test requires both sexes to be present")

    deg = graph.degrees[observed_idx].astype(float)
    deg_total = float(deg.sum())
    male_mean = float(deg[male].mean())
    female_mean = float(deg[~male].mean())
    male_bounds = (male_mean * (1.0 - tolerance), male_mean * (1.0 + tolerance))
    female_bounds = (female_mean * (1.0 - tolerance), female_mean * (1.0 + tolerance))

    pos = np.full(graph.node_count, -1, dtype=np.int64)
    pos[observed_idx] = np.arange(observed_idx.size)
    pu = pos[graph.edge_u]
    pv = pos[graph.edge_v]
    keep = (pu >= 0) & (pv >= 0)
    eu_o, ev_o = pu[keep], pv[keep]

    def _tie_counts(male_vec: np.ndarray) -> tuple[int, int, int]:
        a = male_vec[eu_o]
        b = male_vec[ev_o]
        mm = int((a & b).sum())
        ff = int((~a & ~b).sum())
        return mm, int(a.size - mm - ff), ff

    observed = TieTriple(*_tie_counts(male))

    seed_entropy = int(seed) % (2**63)
    counts = np.empty((target_replicates, 3), dtype=np.int64)
    md_arr = np.empty(target_replicates)
    fd_arr = np.empty(target_replicates)
    collected = 0
    attempts = 0
    valid_total = 0
    batch_index = 0
    while collected < target_replicates:
        rng = np.random.default_rng(np.random.SeedSequence([seed_entropy, batch_index]))
        keys = rng.random((batch_size, deg.size))
        order = np.argsort(keys, axis=1)
        male_mat = male[order]
        md = (male_mat * deg).sum(axis=1) / n_male
        fd = (deg_total - md * n_male) / n_female
        valid = (
            (md >= male_bounds[0])
            & (md <= male_bounds[1])
            & (fd >= female_bounds[0])
            & (fd <= female_bounds[1])
        )
        valid_total += int(valid.sum())
        for row in np.flatnonzero(valid).tolist():
            if collected == target_replicates:
                break
            counts[collected] = _tie_counts(male_mat[row])
            md_arr[collected] = md[row]
            fd_arr[collected] = fd[row]
            collected += 1
        attempts += batch_size
        batch_index += 1
        if collected < target_replicates and attempts >= max_attempts:
            rate = valid_total / attempts
            if rate < 0.001:
                raise ValueError(
                    f"valid-replicate acceptance rate {rate:.4%} below 0.1% after "
                    f"{attempts} attempts; consider a larger tolerance"
                )

    expected = TieTriple(*(float(x) for x in counts.mean(axis=0)))
    p_values = TieTriple(*(_mc_two_sided(counts[:, k], observed[k]) for k in range(3)))
    ratios = []
    verdicts = []
    for k in range(3):
        exp = expected[k]
        ratios.append(observed[k] / exp if exp > 0 else float("nan"))
        if p_values[k] < 0.05 and observed[k] > exp:
            verdicts.append("assortative")
        elif p_values[k] < 0.05 and observed[k] < exp:
            verdicts.append("dissortative")
        else:
            verdicts.append("ns")

    return SexPermutationResult(
        observed=observed,
        expected_mean=expected,
        ratio=TieTriple(*ratios),
        p_values=p_values,
        verdicts=TieTriple(*verdicts),
        n_replicates=target_replicates,
        tolerance=tolerance,
        n_attempts=attempts,
        male_mean_degree=male_mean,
        female_mean_degree=female_mean,
        male_degree_bounds=male_bounds,
        female_degree_bounds=female_bounds,
        replicate_male_mean_degrees=md_arr,
        replicate_female_mean_degrees=fd_arr,
        replicate_counts=counts,
    )


def degree_missingness_ttest(
    graph: UndirectedGraph, table: AttributeTable, attr: str
) -> tuple[float, float]:
    """Welch two-sample t-test of degrees, attribute-observed vs missing nodes.

    Positive statistic means the observed group has the higher mean degree.
    Both groups must have at least 2 members.
    """
    present = table.is_present(attr)
    if present.shape != (graph.node_count,):
        raise ValueError("attribute table does not align with the graph")
    deg = graph.degrees.astype(float)
    a = deg[present]
    b = deg[~present]
    if a.size < 2 or b.size < 2:
        raise ValueError(
            f"both groups need at least 2 nodes (observed {a.size}, missing {b.size})"
        )
    if a.var(ddof=1) == 0.0 and b.var(ddof=1) == 0.0:
        # Degenerate Welch limit: zero pooled variability.
        if a.mean() == b.mean():
            return 0.0, 1.0
        return (math.inf if a.mean() > b.mean() else -math.inf), 0.0
    with warnings.catch_warnings():
        # Near-constant degree groups trip scipy's precision-loss warning;
        # the statistic is still the reportable Welch value.
        warnings.simplefilter("ignore", RuntimeWarning)
        result = stats.ttest_ind(a, b, equal_var=False)
    return float(result.statistic), float(result.pvalue)
