"""
Tests for t-sets, the valid t-set universe and covering-array files.
"""

import itertools

import numpy as np
import pytest

from splcit.exceptions import DimensionMismatchError, SuiteFormatError
from splcit.feature_model import FeatureSet, feature_set_from_names, parse_model
from splcit.sat_core import enumerate_products
from splcit.synthetic import SyntheticSpec, synthetic_model
from splcit.tset_engine import (
    CoveringArray,
    GenerationMeta,
    TSet,
    coverage_gap,
    covers,
    enumerate_valid_tsets,
    format_covering_array,
    is_valid_tset,
    parse_covering_array,
    read_covering_array,
    size_lower_bound,
    tsets_covered_by,
    verify_covering_array,
    write_covering_array,
)


def tset(model, selected=(), deselected=()):
    return TSet(
        frozenset(model.index_of(n) for n in selected),
        frozenset(model.index_of(n) for n in deselected),
    )


class TestTSet:
    """Test t-set basics."""

    def test_overlap_rejected(self):
        """Test that a feature may not be forced both ways."""
        with pytest.raises(ValueError, match="appear twice"):
            TSet(frozenset({1}), frozenset({1}))

    def test_polarity_mask_first_feature_most_significant(self):
        """Test the canonical polarity bitmask."""
        assert TSet(frozenset({2}), frozenset({5})).polarity_mask == 0b10
        assert TSet(frozenset({5}), frozenset({2})).polarity_mask == 0b01
        assert TSet(frozenset({2, 5}), frozenset()).sort_key == ((2, 5), 0b11)

    def test_describe(self, gpl):
        """Test the human-readable form."""
        assert tset(gpl, ["Driver"], ["Prim"]).describe(gpl) == "[{Driver}, {Prim}]"

    def test_covers(self, gpl, reference_suite):
        """Test coverage of a pair by a product."""
        fs0 = reference_suite[0]
        assert covers(fs0, tset(gpl, ["Driver", "Prim"]))
        assert not covers(fs0, tset(gpl, ["Driver"], ["Prim"]))

    def test_covered_tset_covers_its_subsets(self, gpl, reference_suite):
        """Test that a product covering a t-set covers every t-set it contains."""
        rng = np.random.default_rng(5)
        for fs in reference_suite:
            values = fs.values()
            for _ in range(25):
                features = sorted(int(f) for f in rng.choice(len(gpl), size=4, replace=False))
                # half the time take the product's own polarities so that it covers
                own = bool(rng.integers(0, 2))
                polarities = [values[f] if own else bool(rng.integers(0, 2)) for f in features]
                ts = TSet.from_polarities(features, polarities)
                if not covers(fs, ts):
                    continue
                for size in range(1, 4):
                    for picked in itertools.combinations(range(4), size):
                        sub = TSet.from_polarities(
                            [features[i] for i in picked], [polarities[i] for i in picked]
                        )
                        assert covers(fs, sub)

    def test_covers_dimension_mismatch(self):
        """Test that a t-set beyond the feature set's range is rejected."""
        with pytest.raises(DimensionMismatchError):
            covers(FeatureSet.from_selected({0}, 3), TSet(frozenset({7}), frozenset()))


class TestUniverse:
    """Test valid t-set enumeration."""

    def test_gpl_has_418_pairs(self, gpl_universe):
        """Test the number of valid GPL 2-sets."""
        assert len(gpl_universe) == 418

    def test_canonical_order(self, gpl_universe):
        """Test that the universe is sorted by feature tuple then polarity mask."""
        keys = [ts.sort_key for ts in gpl_universe]
        assert keys == sorted(keys)
        assert gpl_universe.tsets[0] == TSet(frozenset({0, 1}), frozenset())

    def test_gpl_single_features(self, gpl):
        """Test that core features contribute one 1-set and variant features two."""
        assert len(enumerate_valid_tsets(gpl, 1)) == 5 + 2 * 13

    def test_universe_equals_union_over_products(self, gpl):
        """Test that the universe is exactly the pairs covered by some product."""
        universe = enumerate_valid_tsets(gpl, 2)
        assert set(universe) == tsets_covered_by(enumerate_products(gpl), 2)

    @pytest.mark.parametrize(
        "features,seed,strengths",
        [(6, 6, (1, 2, 3)), (9, 2, (1, 2, 3)), (12, 12, (1, 2)), (16, 5, (2,))],
    )
    def test_synthetic_universe_matches_products(self, features, seed, strengths):
        """Test the universe against products on small synthetic models."""
        model = synthetic_model(SyntheticSpec(f"s{features}", features, seed=seed))
        for t in strengths:
            universe = enumerate_valid_tsets(model, t)
            expected = tsets_covered_by(enumerate_products(model), t)
            assert set(universe) == expected
            assert len(universe) == len(expected)

    def test_t_out_of_range(self, gpl):
        """Test that t must lie in [1, |FL|]."""
        with pytest.raises(ValueError, match=r"t must be in \[1, 18\]"):
            enumerate_valid_tsets(gpl, 0)
        with pytest.raises(ValueError):
            enumerate_valid_tsets(gpl, 19)

    def test_is_valid_tset(self, gpl):
        """Test validity of individual pairs."""
        assert is_valid_tset(gpl, tset(gpl, ["Kruskal", "DFS"]))
        assert not is_valid_tset(gpl, tset(gpl, ["Prim", "Kruskal"]))
        assert not is_valid_tset(gpl, tset(gpl, [], ["Driver"]))

    def test_lower_bound(self, gpl_universe):
        """Test that two independent variant features force four rows."""
        assert size_lower_bound(gpl_universe) == 4

    def test_root_only_universe(self):
        """Test the single 1-set of a root-only model."""
        universe = enumerate_valid_tsets(parse_model("root A\n"), 1)
        assert list(universe) == [TSet(frozenset({0}), frozenset())]


class TestVerification:
    """Test coverage gaps and covering-array verification."""

    def test_reference_suite_gap(self, gpl, gpl_universe, reference_suite):
        """Test that the eight reference products leave 24 pairs uncovered."""
        gap = coverage_gap(gpl_universe, reference_suite)
        assert len(gap) == 24
        assert tset(gpl, ["Prim", "Directed"]) not in gap

    def test_verify_reports_gap(self, gpl, gpl_universe, reference_suite):
        """Test that verification lists uncovered pairs in canonical order."""
        verification = verify_covering_array(gpl, gpl_universe, reference_suite)

        assert verification.invalid_rows == ()
        assert len(verification.uncovered) == 24
        keys = [ts.sort_key for ts in verification.uncovered]
        assert keys == sorted(keys)
        assert not verification.ok

    def test_all_products_cover_everything(self, gpl, gpl_universe):
        """Test that the full product set is a covering array."""
        assert verify_covering_array(gpl, gpl_universe, enumerate_products(gpl)).ok

    def test_verify_flags_invalid_rows(self, gpl, gpl_universe, reference_suite):
        """Test that invalid rows are reported by position."""
        invalid = feature_set_from_names(
            gpl, ["GPL", "Driver", "Benchmark", "GraphType", "Algorithms", "Search", "DFS", "BFS"]
        )
        products = list(enumerate_products(gpl)) + [invalid]
        verification = verify_covering_array(gpl, gpl_universe, products)

        assert verification.invalid_rows == (73,)
        assert verification.uncovered == ()


class TestCoveringArrayFile:
    """Test the covering-array text format."""

    def make_array(self, gpl, reference_suite):
        return CoveringArray(
            model_name="gpl",
            t=2,
            products=tuple(reference_suite[:2]),
            meta=GenerationMeta("greedy", 7, 12),
        )

    def test_format(self, gpl, reference_suite):
        """Test header and product lines."""
        text = format_covering_array(gpl, self.make_array(gpl, reference_suite))
        lines = text.splitlines()

        assert lines[0] == "ca gpl t=2 algo=greedy seed=7 ms=12"
        assert lines[1] == "GPL Driver Benchmark GraphType Undirected Weight Algorithms Prim"
        assert len(lines) == 3

    def test_write_and_read(self, gpl, reference_suite, tmp_path):
        """Test that a written array reads back equal."""
        ca = self.make_array(gpl, reference_suite)
        path = write_covering_array(gpl, ca, tmp_path / "out" / "suite.ca")
        assert read_covering_array(gpl, path) == ca

    def test_aliases_accepted(self, gpl):
        """Test that product lines may use aliases."""
        text = (
            "ca gpl t=2 algo=manual seed=0 ms=0\n"
            "GPL Driver Benchmark GraphType Undirected Algorithms Search DFS Connected\n"
        )
        ca = parse_covering_array(gpl, text)
        assert gpl.index_of("CC") in ca.products[0].sel

    def test_malformed_header(self, gpl):
        """Test that a bad header is reported on line 1."""
        with pytest.raises(SuiteFormatError, match="line 1: malformed header"):
            parse_covering_array(gpl, "suite gpl\nGPL\n")

    def test_unknown_feature(self, gpl):
        """Test that unknown names are reported with their line."""
        text = "ca gpl t=2 algo=greedy seed=0 ms=1\nGPL Driver\nGPL Teleport\n"
        with pytest.raises(SuiteFormatError, match="line 3: Unknown feature 'Teleport'"):
            parse_covering_array(gpl, text)

    def test_empty_file(self, gpl):
        """Test that an empty file is rejected."""
        with pytest.raises(SuiteFormatError, match="empty"):
            parse_covering_array(gpl, "")

    def test_missing_file(self, gpl, tmp_path):
        """Test that a missing file is a format error."""
        with pytest.raises(SuiteFormatError, match="cannot read"):
            read_covering_array(gpl, tmp_path / "missing.ca")
