import math

import numpy as np
import pytest

from segnet import (
    FeatureEncoding,
    FeatureSpec,
    FitOptions,
    build_dyad_design,
    build_graph,
    default_feature_spec,
    degree_missingness_ttest,
    fit_logistic,
    generate_dyad_sample,
    sex_permutation_test,
)

from .conftest import make_table
from .oracles import (
    cross_product_odds_ratio,
    dyad_2x2_from_rows,
    exhaustive_sex_permutation,
    logistic_2x2,
    tie_triple_by_loop,
    welch_t_closed_form,
)


def small_design():
    graph, _ = build_graph([(0, 1), (1, 2), (2, 3)], node_ids=range(4))
    table = make_table(range(4), caste=[0, 0, 3, 3], age=[20.0, 35.0, 50.0, 50.0])
    spec = FeatureSpec(
        {
            "caste": FeatureEncoding("match"),
            "age": FeatureEncoding("difference"),
        }
    )
    return build_dyad_design(graph, table, spec)


class TestDyadDesign:
    def test_enumerates_every_unordered_pair_once(self):
        design = small_design()
        rows = list(design.rows())
        assert design.n_rows == 6
        assert [(i, j) for i, j, _, _ in rows] == [
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (1, 3),
            (2, 3),
        ]

    def test_features_and_ties_are_correct(self):
        rows = {(i, j): (y, x) for i, j, y, x in small_design().rows()}
        assert rows[(0, 1)] == (1.0, (1.0, 15.0))
        assert rows[(0, 2)] == (0.0, (0.0, 30.0))
        assert rows[(2, 3)] == (1.0, (1.0, 0.0))
        assert rows[(1, 3)] == (0.0, (0.0, 15.0))

    def test_binned_difference_uses_bin_distance(self):
        graph, _ = build_graph([(0, 1)], node_ids=range(3))
        table = make_table(range(3), education=[0.0, 12.0, 15.0])
        spec = FeatureSpec(
            {"education": FeatureEncoding("difference", (1.0, 10.0, 14.0, 16.0))}
        )
        rows = {(i, j): x for i, j, _, x in build_dyad_design(graph, table, spec).rows()}
        # bins: 0 -> 0, 12 -> 2, 15 -> 3
        assert rows[(0, 1)] == (2.0,)
        assert rows[(0, 2)] == (3.0,)
        assert rows[(1, 2)] == (1.0,)

    def test_blocks_concatenate_to_the_same_rows(self):
        design = small_design()
        via_blocks = []
        for ipos, jpos, X, y in design.iter_blocks(block_size=2):
            via_blocks += list(zip(ipos.tolist(), jpos.tolist(), y.tolist()))
        assert len(via_blocks) == design.n_rows
        assert via_blocks == [(i, j, y) for i, j, y, _ in _positional_rows(design)]

    def test_only_complete_case_nodes_enter(self):
        graph, _ = build_graph([(0, 1), (1, 2)], node_ids=range(3))
        table = make_table(range(3), caste=[0, -1, 3])
        design = build_dyad_design(graph, table, FeatureSpec({"caste": FeatureEncoding("match")}))
        assert design.n_nodes == 2
        assert design.node_index.tolist() == [0, 2]
        assert design.n_ties == 0  # 0-2 is not an edge

    def test_needs_two_complete_case_nodes(self):
        graph, _ = build_graph([(0, 1)], node_ids=range(2))
        table = make_table(range(2), caste=[0, -1])
        with pytest.raises(ValueError, match="complete-case"):
            build_dyad_design(graph, table, FeatureSpec({"caste": FeatureEncoding("match")}))


def _positional_rows(design):
    node_pos = {int(v): k for k, v in enumerate(design.node_index.tolist())}
    for i, j, y, x in design.rows():
        yield node_pos[i], node_pos[j], y, x


def test_default_spec_covers_all_attributes_with_binned_numerics():
    spec = default_feature_spec()
    assert spec.names == ("sex", "age", "religion", "caste", "education", "workflag", "savings")
    assert spec.encodings["age"].bins is not None
    assert spec.encodings["sex"].bins is None
    assert spec.encodings["sex"].kind == "match"


def test_difference_encoding_rejected_for_categoricals():
    with pytest.raises(ValueError):
        FeatureSpec({"caste": FeatureEncoding("difference")})


class TestLogisticFit:
    def sample_design(self, seed=5, n=80, beta0=-1.0, beta=1.2):
        dataset = generate_dyad_sample(
            beta0=beta0,
            betas={"caste": beta},
            feature_law={"caste": {"general": 0.5, "obc": 0.5}},
            n_nodes=n,
            seed=seed,
        )
        spec = FeatureSpec({"caste": FeatureEncoding("match")})
        return build_dyad_design(dataset.graph, dataset.attributes, spec)

    def test_single_predictor_matches_closed_form(self):
        design = self.sample_design()
        fit = fit_logistic(design)
        assert fit.converged
        stats_2x2 = dyad_2x2_from_rows(design.rows())
        beta0, beta1, se1 = logistic_2x2(*stats_2x2)
        assert fit.beta0 == pytest.approx(beta0, abs=1e-6)
        assert fit.beta[0] == pytest.approx(beta1, abs=1e-6)
        assert fit.std_errors[0] == pytest.approx(se1, rel=1e-6)
        assert fit.odds_ratios[0] == pytest.approx(
            cross_product_odds_ratio(*stats_2x2), rel=1e-6
        )

    def test_wald_interval_and_p_value_construction(self):
        fit = fit_logistic(self.sample_design())
        lo, hi = fit.ci95[0]
        assert lo == pytest.approx(math.exp(fit.beta[0] - 1.96 * fit.std_errors[0]))
        assert hi == pytest.approx(math.exp(fit.beta[0] + 1.96 * fit.std_errors[0]))
        from scipy import stats as sps

        z = fit.beta[0] / fit.std_errors[0]
        assert fit.p_values[0] == pytest.approx(2 * sps.norm.sf(abs(z)), rel=1e-12)

    def test_block_size_never_changes_the_estimate(self):
        design = self.sample_design(seed=9)
        full = fit_logistic(design, FitOptions(block_size=1 << 18))
        tiny = fit_logistic(design, FitOptions(block_size=17))
        assert full.beta0 == pytest.approx(tiny.beta0, abs=1e-12)
        assert full.beta[0] == pytest.approx(tiny.beta[0], abs=1e-12)
        assert full.std_errors[0] == pytest.approx(tiny.std_errors[0], abs=1e-12)

    def test_two_feature_recovery_within_three_se(self):
        dataset = generate_dyad_sample(
            beta0=-1.5,
            betas={"caste": 1.1, "sex": 0.5},
            feature_law={
                "caste": {"general": 0.5, "obc": 0.5},
                "sex": {"male": 0.5, "female": 0.5},
            },
            n_nodes=120,
            seed=21,
        )
        spec = FeatureSpec(
            {"caste": FeatureEncoding("match"), "sex": FeatureEncoding("match")}
        )
        fit = fit_logistic(build_dyad_design(dataset.graph, dataset.attributes, spec))
        assert fit.converged
        for k, truth in enumerate([1.1, 0.5]):
            assert abs(fit.beta[k] - truth) < 3 * fit.std_errors[k]

    def test_constant_feature_is_an_error_naming_the_attribute(self):
        graph, _ = build_graph([(0, 1), (2, 3)], node_ids=range(4))
        table = make_table(range(4), caste=[1, 1, 1, 1], sex=[0, 1, 0, 1])
        spec = FeatureSpec(
            {"caste": FeatureEncoding("match"), "sex": FeatureEncoding("match")}
        )
        with pytest.raises(ValueError, match="caste"):
            fit_logistic(build_dyad_design(graph, table, spec))

    def test_all_tied_or_none_tied_is_an_error(self):
        table = make_table(range(3), caste=[0, 1, 3])
        spec = FeatureSpec({"caste": FeatureEncoding("match")})
        complete, _ = build_graph(
            [(0, 1), (0, 2), (1, 2)], node_ids=range(3)
        )
        with pytest.raises(ValueError, match="tied and untied"):
            fit_logistic(build_dyad_design(complete, table, spec))
        empty, _ = build_graph([], node_ids=range(3))
        with pytest.raises(ValueError, match="tied and untied"):
            fit_logistic(build_dyad_design(empty, table, spec))

    def test_complete_separation_is_flagged_not_raised(self):
        # ties exactly when castes match: the MLE diverges
        edges = [(0, 1), (2, 3), (4, 5)]
        graph, _ = build_graph(edges, node_ids=range(6))
        table = make_table(range(6), caste=[0, 0, 1, 1, 2, 2])
        fit = fit_logistic(
            build_dyad_design(graph, table, FeatureSpec({"caste": FeatureEncoding("match")}))
        )
        assert not fit.converged
        assert "separated" in fit.diagnostic


class TestSexPermutation:
    def test_observed_counts_match_loop_oracle(self, two_triangles):
        graph, table = two_triangles
        result = sex_permutation_test(graph, table, tolerance=0.05, target_replicates=20, seed=1)
        assert tuple(result.observed) == tie_triple_by_loop(graph, table.labels("sex"))
        assert tuple(result.observed) == (3, 0, 3)

    def test_every_replicate_respects_the_degree_constraint(self):
        # unequal degrees so the constraint actually bites
        edges = [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (1, 2)]
        graph, _ = build_graph(edges, node_ids=range(6))
        table = make_table(range(6), sex=[0, 0, 1, 1, 0, 1])
        result = sex_permutation_test(graph, table, tolerance=0.4, target_replicates=150, seed=3)
        lo_m, hi_m = result.male_degree_bounds
        lo_f, hi_f = result.female_degree_bounds
        assert (result.replicate_male_mean_degrees >= lo_m).all()
        assert (result.replicate_male_mean_degrees <= hi_m).all()
        assert (result.replicate_female_mean_degrees >= lo_f).all()
        assert (result.replicate_female_mean_degrees <= hi_f).all()
        # and the counts columns are mm, mf, ff sums of the 6 edges
        assert (result.replicate_counts.sum(axis=1) == graph.edge_count).all()

    def test_expected_counts_approach_exhaustive_enumeration(self, two_triangles):
        graph, table = two_triangles
        counts, p_exact, expected = exhaustive_sex_permutation(
            graph, table.labels("sex"), tolerance=0.05
        )
        assert len(counts["mm"]) == 20  # every assignment is valid here
        assert p_exact == {"mm": 0.2, "mf": 0.2, "ff": 0.2}
        assert expected == {"mm": 1.2, "mf": 3.6, "ff": 1.2}
        result = sex_permutation_test(
            graph, table, tolerance=0.05, target_replicates=2000, seed=7
        )
        assert result.expected_mean.mm == pytest.approx(1.2, abs=0.1)
        assert result.expected_mean.mf == pytest.approx(3.6, abs=0.2)
        assert result.p_values.mm == pytest.approx(0.2, abs=0.05)
        assert result.verdicts == ("ns", "ns", "ns")

    def test_verdicts_follow_sign_and_significance(self):
        # two male hubs tied to each other and most females isolated pairs:
        # make mm ties overwhelmingly likely under any valid permutation
        edges = [(0, 1), (0, 2), (1, 2), (3, 4), (5, 6), (7, 8)]
        graph, _ = build_graph(edges, node_ids=range(10))
        # node 9 has no sex recorded and degree 0
        table = make_table(range(10), sex=[0, 0, 0, 1, 1, 1, 1, 1, 1, -1])
        result = sex_permutation_test(graph, table, tolerance=5.0, target_replicates=400, seed=11)
        assert result.observed.mm == 3
        if result.p_values.mm < 0.05:
            assert result.verdicts.mm == "assortative"
        assert result.n_replicates == 400

    def test_single_sex_network_is_an_error(self):
        graph, _ = build_graph([(0, 1)], node_ids=range(2))
        table = make_table(range(2), sex=[0, 0])
        with pytest.raises(ValueError, match="both sexes"):
            sex_permutation_test(graph, table, tolerance=0.1)

    def test_hopeless_acceptance_rate_raises(self):
        # male K8 with one female pendant per clique node: group mean degrees
        # differ so much that almost no permutation is valid at 5% tolerance
        edges = [(i, j) for i in range(8) for j in range(i + 1, 8)]
        edges += [(i, 8 + i) for i in range(8)]
        graph, _ = build_graph(edges, node_ids=range(16))
        table = make_table(range(16), sex=[0] * 8 + [1] * 8)
        with pytest.raises(ValueError, match="acceptance rate"):
            sex_permutation_test(
                graph,
                table,
                tolerance=0.05,
                target_replicates=50,
                seed=13,
                max_attempts=2048,
            )

    def test_two_sided_p_never_exceeds_one(self, two_triangles):
        graph, table = two_triangles
        result = sex_permutation_test(graph, table, tolerance=1.0, target_replicates=99, seed=17)
        for p in result.p_values:
            assert 0.0 < p <= 1.0


class TestDegreeMissingnessTtest:
    def test_matches_closed_form_welch(self):
        rng = np.random.default_rng(51)
        edges = [(i, j) for i in range(12) for j in range(i + 1, 12) if rng.random() < 0.4]
        graph, _ = build_graph(edges, node_ids=range(12))
        caste = np.array([3] * 7 + [-1] * 5)
        table = make_table(range(12), caste=caste)
        t, p = degree_missingness_ttest(graph, table, "caste")
        deg = graph.degrees
        t_ref, p_ref = welch_t_closed_form(deg[caste >= 0], deg[caste < 0])
        assert t == pytest.approx(t_ref, rel=1e-12)
        assert p == pytest.approx(p_ref, rel=1e-10)

    def test_sign_convention_observed_minus_missing(self):
        graph, _ = build_graph([(0, 1), (0, 2), (0, 3), (1, 2)], node_ids=range(5))
        table = make_table(range(5), caste=[3, 3, 3, -1, -1])
        t, _ = degree_missingness_ttest(graph, table, "caste")
        assert t > 0  # observed nodes have higher degrees here

    def test_zero_variance_cases(self):
        graph, _ = build_graph([(0, 1), (2, 3)], node_ids=range(4))
        equal = make_table(range(4), caste=[3, 3, -1, -1])
        assert degree_missingness_ttest(graph, equal, "caste") == (0.0, 1.0)
        # two observed hubs of equal degree vs six missing leaves: both groups
        # have zero variance but different means
        twin_stars, _ = build_graph(
            [(0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7)], node_ids=range(8)
        )
        unequal = make_table(range(8), caste=[3, 3, -1, -1, -1, -1, -1, -1])
        t, p = degree_missingness_ttest(twin_stars, unequal, "caste")
        assert t == math.inf and p == 0.0

    def test_requires_both_groups(self):
        graph, _ = build_graph([(0, 1)], node_ids=range(2))
        table = make_table(range(2), caste=[3, 3])
        with pytest.raises(ValueError):
            degree_missingness_ttest(graph, table, "caste")
