"""
Tests for suite metrics.
"""

import math

import pytest

from splcit import metrics
from splcit.exceptions import DimensionMismatchError, UndefinedMetricError
from splcit.feature_model import FeatureSet, parse_model
from splcit.generators import ALGORITHMS, GeneratorConfig, generate
from splcit.metrics import (
    CSV_HEADER,
    compute_suite_metrics,
    covered_tuple_count,
    expected_mean_tuple_frequency,
    frequency_histogram,
    mean_tuple_frequency,
    similarity,
    tuple_frequencies,
    tuple_frequency,
    variant_features,
    variant_set,
)
from splcit.tset_engine import TSet, enumerate_valid_tsets

GPL_MEAN = 153 / 418


def pair(model, selected=(), deselected=()):
    return TSet(
        frozenset(model.index_of(n) for n in selected),
        frozenset(model.index_of(n) for n in deselected),
    )


class TestSimilarity:
    """Test product and suite similarity."""

    def test_variant_set(self, gpl):
        """Test that GPL has 13 variant features."""
        assert len(variant_set(gpl)) == 13
        assert gpl.index_of("Driver") not in variant_set(gpl)

    def test_variant_features(self, gpl, reference_suite):
        """Test that core features are ignored."""
        assert set(gpl.names_of(variant_features(reference_suite[0], gpl))) == {
            "Undirected",
            "Weight",
            "Prim",
        }

    def test_disjoint_products(self, gpl, reference_suite):
        """Test that products sharing no variant feature have similarity 0."""
        assert similarity(reference_suite[0], reference_suite[2], gpl) == 0.0

    def test_overlapping_products(self, gpl, reference_suite):
        """Test the Jaccard index of two overlapping products."""
        assert similarity(reference_suite[1], reference_suite[7], gpl) == 0.625

    def test_symmetric_and_reflexive(self, gpl, reference_suite):
        """Test symmetry and self-similarity."""
        a, b = reference_suite[3], reference_suite[5]
        assert similarity(a, b, gpl) == similarity(b, a, gpl)
        assert similarity(a, a, gpl) == 1.0

    def test_no_variant_features(self):
        """Test that products without variant features have similarity 0."""
        model = parse_model("root A\nmandatory B A\n")
        fs = FeatureSet.from_selected({0, 1}, 2)
        assert similarity(fs, fs, model) == 0.0

    def test_dimension_mismatch(self, gpl):
        """Test that a product of the wrong size is rejected."""
        with pytest.raises(DimensionMismatchError):
            variant_features(FeatureSet.from_selected({0}, 3), gpl)

    def test_suite_similarity_matches_pairwise_mean(self, gpl, reference_suite):
        """Test that suite similarity is the mean over all ordered pairs."""
        expected = sum(
            similarity(a, b, gpl) for a in reference_suite for b in reference_suite
        ) / len(reference_suite) ** 2
        assert metrics.test_suite_similarity(reference_suite, gpl) == pytest.approx(
            expected, abs=1e-12
        )

    def test_single_product_suite(self, gpl, reference_suite):
        """Test that a one-product suite is fully similar to itself."""
        assert metrics.test_suite_similarity(reference_suite[:1], gpl) == 1.0

    def test_empty_suite(self, gpl):
        """Test that similarity of an empty suite is undefined."""
        with pytest.raises(UndefinedMetricError, match="empty suite"):
            metrics.test_suite_similarity([], gpl)

    def test_suite_size(self, reference_suite):
        """Test the size metric."""
        assert metrics.test_suite_size(reference_suite) == 8
        assert metrics.test_suite_size([]) == 0


class TestTupleFrequency:
    """Test tuple frequency and its histogram."""

    def test_driver_without_prim(self, gpl, reference_suite):
        """Test the frequency of a pair covered by six of eight products."""
        assert tuple_frequency(pair(gpl, ["Driver"], ["Prim"]), reference_suite) == 0.75

    def test_kruskal_with_dfs(self, gpl, reference_suite):
        """Test the frequency of a pair covered by one product."""
        assert tuple_frequency(pair(gpl, ["Kruskal", "DFS"]), reference_suite) == 0.125

    def test_frequencies_in_universe_order(self, gpl, gpl_universe, reference_suite):
        """Test that the vector form agrees with single lookups."""
        vector = tuple_frequencies(gpl_universe, reference_suite)
        index = gpl_universe.index[pair(gpl, ["Driver"], ["Prim"])]
        assert vector[index] == 0.75
        assert len(vector) == 418
        assert int((vector == 0).sum()) == 24

    def test_histogram(self, gpl_universe, reference_suite):
        """Test that the histogram counts every universe member once."""
        histogram = frequency_histogram(gpl_universe, reference_suite)
        assert len(histogram) == 10
        assert sum(histogram) == 418
        assert histogram[0] >= 24

    def test_histogram_full_frequency_in_last_bucket(self, gpl, gpl_universe, reference_suite):
        """Test that pairs covered by every product land in the last bucket."""
        histogram = frequency_histogram(gpl_universe, reference_suite[:1])
        assert histogram[9] == 153
        assert histogram[0] == 418 - 153

    def test_empty_suite(self, gpl, gpl_universe):
        """Test that tuple frequency of an empty suite is undefined."""
        with pytest.raises(UndefinedMetricError):
            tuple_frequency(pair(gpl, ["Driver"]), [])
        with pytest.raises(UndefinedMetricError):
            mean_tuple_frequency(gpl_universe, [])


class TestMeanTupleFrequency:
    """Test the mean tuple frequency identity."""

    def test_closed_form(self):
        """Test the closed form for GPL."""
        assert expected_mean_tuple_frequency(18, 418) == pytest.approx(GPL_MEAN)
        assert expected_mean_tuple_frequency(18, 0) == 0.0

    def test_every_product_covers_153_pairs(self, gpl, gpl_universe, reference_suite):
        """Test that each valid product covers C(18, 2) valid pairs."""
        assert all(covered_tuple_count(gpl_universe, fs) == 153 for fs in reference_suite)

    def test_reference_suite(self, gpl_universe, reference_suite):
        """Test the identity on the reference products."""
        assert mean_tuple_frequency(gpl_universe, reference_suite) == pytest.approx(
            GPL_MEAN, abs=1e-12
        )

    @pytest.mark.parametrize("algorithm", sorted(ALGORITHMS))
    def test_generated_arrays(self, gpl, gpl_cnf, gpl_universe, algorithm):
        """Test the identity on generated arrays, row by row and in aggregate."""
        config = GeneratorConfig.from_mapping(
            {"annealing": {"moves_per_temperature": 50}, "genetic": {"population_size": 10}},
            seed=11,
        )
        ca = generate(algorithm, gpl, 2, config, gpl_universe, gpl_cnf)

        assert mean_tuple_frequency(gpl_universe, ca) == pytest.approx(GPL_MEAN, abs=1e-12)
        assert all(covered_tuple_count(gpl_universe, fs) == 153 for fs in ca.products)

    def test_three_wise(self, gpl):
        """Test the identity for t=3."""
        universe = enumerate_valid_tsets(gpl, 3)
        ca = generate("greedy", gpl, 3, GeneratorConfig(seed=0), universe)
        expected = expected_mean_tuple_frequency(18, len(universe), t=3)
        assert mean_tuple_frequency(universe, ca) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(math.comb(18, 3) / len(universe))


class TestSuiteMetrics:
    """Test the combined metrics record."""

    def test_reference_suite(self, gpl, gpl_universe, reference_suite):
        """Test all metrics of the reference products at once."""
        result = compute_suite_metrics(gpl, gpl_universe, reference_suite, generation_ms=5)

        assert result.size == 8
        assert result.generation_ms == 5
        assert result.mean_tuple_frequency == pytest.approx(GPL_MEAN, abs=1e-12)
        assert result.frequency_histogram == tuple(
            frequency_histogram(gpl_universe, reference_suite)
        )
        assert result.similarity == metrics.test_suite_similarity(reference_suite, gpl)

    def test_generation_time_from_metadata(self, gpl, gpl_cnf, gpl_universe):
        """Test that a covering array's own generation time is used."""
        ca = generate("greedy", gpl, 2, GeneratorConfig(seed=1), gpl_universe, gpl_cnf)
        result = compute_suite_metrics(gpl, gpl_universe, ca)
        assert result.generation_ms == ca.meta.generation_ms

    def test_csv_row(self, gpl, gpl_universe, reference_suite):
        """Test that CSV rows line up with the header."""
        row = compute_suite_metrics(gpl, gpl_universe, reference_suite).csv_row("gpl", "manual", 0)
        assert len(row) == len(CSV_HEADER)
        assert row[:4] == ["gpl", "manual", 0, 8]
        assert float(row[6]) == pytest.approx(GPL_MEAN)
