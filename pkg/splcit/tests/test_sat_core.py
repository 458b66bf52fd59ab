"""
Tests for the propositional encoding and the DPLL solver.
"""

import itertools

import numpy as np
import pytest

from splcit.exceptions import EnumerationOverflowError, ModelValidationError, VoidModelError
from splcit.feature_model import is_valid_assignment, parse_model
from splcit.sat_core import (
    Assumption,
    CnfFormula,
    count_products,
    enumerate_products,
    feature_classes,
    is_satisfiable,
    solve,
    to_cnf,
    to_dimacs,
)
from splcit.synthetic import SyntheticSpec, synthetic_model

TEN_OPTIONAL = "root R\n" + "".join(f"optional O{i} R\n" for i in range(10))


def brute_force_products(model):
    """Every valid assignment in lexicographic order, by exhaustive evaluation."""
    return [
        values
        for values in itertools.product([False, True], repeat=len(model))
        if is_valid_assignment(model, values)
    ]


class TestAssumption:
    """Test the literal convention."""

    def test_select_and_deselect(self):
        """Test that feature i maps to DIMACS literal +/-(i + 1)."""
        assert Assumption.select(0).literal == 1
        assert Assumption.deselect(4).literal == -5
        assert Assumption.deselect(4).variable == 4
        assert not Assumption.deselect(4).selected


class TestCnfFormula:
    """Test formula validation."""

    def test_empty_clause_rejected(self):
        """Test that empty clauses are rejected."""
        with pytest.raises(ModelValidationError, match="empty"):
            CnfFormula(2, ((1,), ()))

    def test_literal_out_of_range(self):
        """Test that literals must address existing variables."""
        with pytest.raises(ModelValidationError, match="out of range"):
            CnfFormula(2, ((1, 3),))

    def test_tautological_clause_rejected(self):
        """Test that a clause may not hold a literal and its negation."""
        with pytest.raises(ModelValidationError, match="negation"):
            CnfFormula(2, ((1, -1),))


class TestSolve:
    """Test satisfiability queries."""

    def test_gpl_satisfiable(self, gpl, gpl_cnf):
        """Test that GPL has a valid product and the solver returns one."""
        solution = solve(gpl_cnf)
        assert solution is not None
        assert is_valid_assignment(gpl, solution)

    def test_assumptions_respected(self, gpl, gpl_cnf):
        """Test that solutions honour the assumed literals."""
        kruskal = gpl.index_of("Kruskal")
        dfs = gpl.index_of("DFS")
        solution = solve(gpl_cnf, [Assumption.select(kruskal), Assumption.select(dfs)])

        assert solution[kruskal] and solution[dfs]
        assert solution[gpl.index_of("Undirected")]
        assert is_valid_assignment(gpl, solution)

    def test_conflicting_assumptions(self, gpl, gpl_cnf):
        """Test that Prim together with Kruskal is unsatisfiable."""
        prim = Assumption.select(gpl.index_of("Prim"))
        kruskal = Assumption.select(gpl.index_of("Kruskal"))
        assert not is_satisfiable(gpl_cnf, [prim, kruskal])

    def test_assumption_out_of_range(self, gpl_cnf):
        """Test that assumptions must address existing variables."""
        with pytest.raises(ValueError, match="out of range"):
            solve(gpl_cnf, [Assumption.select(40)])

    def test_valid_phase_returned_unchanged(self, gpl, gpl_cnf, reference_suite):
        """Test that a phase that is already a valid product is returned as is."""
        for fs in reference_suite:
            assert solve(gpl_cnf, phase=fs.values()) == fs.values()

    def test_phase_repairs_invalid_product(self, gpl, gpl_cnf):
        """Test that an invalid phase still yields a valid product."""
        phase = [True] * len(gpl)
        solution = solve(gpl_cnf, phase=phase)
        assert is_valid_assignment(gpl, solution)

    @pytest.mark.parametrize("features,seed", [(0, 0), (11, 1), (19, 19)])
    def test_more_assumptions_never_satisfiable_again(self, gpl, features, seed):
        """Test that once assumptions are unsatisfiable, adding more keeps them so."""
        model = gpl if features == 0 else synthetic_model(SyntheticSpec("m", features, seed))
        cnf = to_cnf(model)
        rng = np.random.default_rng(seed)
        for _ in range(40):
            order = rng.permutation(len(model))[: rng.integers(2, 8)]
            chain = [
                Assumption.select(int(f)) if rng.integers(0, 2) else Assumption.deselect(int(f))
                for f in order
            ]
            results = [is_satisfiable(cnf, chain[:k]) for k in range(len(chain) + 1)]
            assert results[0]
            assert results == sorted(results, reverse=True)


class TestCounting:
    """Test product counting and enumeration."""

    def test_gpl_has_73_products(self, gpl, gpl_cnf):
        """Test the GPL product count."""
        assert count_products(gpl, cnf=gpl_cnf) == 73
        assert len(enumerate_products(gpl, cnf=gpl_cnf)) == 73

    def test_enumeration_is_lexicographic(self, gpl):
        """Test that products come in lexicographic canonical order."""
        products = [fs.values() for fs in enumerate_products(gpl)]
        assert products == sorted(products)
        assert len(set(products)) == 73

    def test_root_only(self):
        """Test that a root-only model has exactly one product."""
        model = parse_model("root A\n")
        assert count_products(model) == 1
        assert [fs.sel for fs in enumerate_products(model)] == [frozenset({0})]

    def test_optional_children_closed_form(self):
        """Test that a root with ten optional children has 2^10 products."""
        model = parse_model(TEN_OPTIONAL)
        assert count_products(model) == 1024
        assert len(enumerate_products(model)) == 1024

    def test_count_cap_exceeded(self, gpl):
        """Test that counting beyond the cap raises and names the cap."""
        with pytest.raises(EnumerationOverflowError, match="cap of 10 products") as exc_info:
            count_products(gpl, cap=10)
        assert exc_info.value.cap == 10

    @pytest.mark.parametrize("cap", [1, 10, 50, 72])
    def test_overflow_names_configured_cap(self, gpl, cap):
        """Test that the overflow error carries the configured cap, not the remaining budget."""
        with pytest.raises(EnumerationOverflowError) as exc_info:
            count_products(gpl, cap=cap)
        assert exc_info.value.cap == cap
        assert str(exc_info.value) == f"Product enumeration exceeded the cap of {cap} products"

    def test_enumerate_cap_exceeded(self):
        """Test that enumeration honours the cap before materialising products."""
        with pytest.raises(EnumerationOverflowError, match="cap of 1000 products") as exc_info:
            enumerate_products(parse_model(TEN_OPTIONAL), cap=1000)
        assert exc_info.value.cap == 1000

    def test_cap_equal_to_count(self, gpl):
        """Test that a cap equal to the product count is not exceeded."""
        assert count_products(gpl, cap=73) == 73

    def test_void_model_has_no_products(self):
        """Test that a contradictory model counts zero products."""
        model = parse_model("root A\nmandatory B A\nexcludes B A\n")
        assert count_products(model) == 0
        assert enumerate_products(model) == []

    @pytest.mark.parametrize("features,seed", [(6, 6), (8, 3), (10, 10), (12, 4), (14, 14)])
    def test_matches_exhaustive_evaluation(self, features, seed):
        """Test enumeration against exhaustive 2^n evaluation on synthetic models."""
        model = synthetic_model(
            SyntheticSpec(f"s{features}", features, seed=seed, ctc_density=0.15)
        )
        expected = brute_force_products(model)

        assert [fs.values() for fs in enumerate_products(model)] == expected
        assert count_products(model) == len(expected)

    def test_matches_exhaustive_evaluation_gpl(self, gpl):
        """Test GPL enumeration against exhaustive evaluation."""
        assert [fs.values() for fs in enumerate_products(gpl)] == brute_force_products(gpl)


class TestFeatureClasses:
    """Test core and dead detection by satisfiability."""

    def test_gpl_classes(self, gpl, gpl_cnf):
        """Test the GPL core features and absence of dead features."""
        core, dead = feature_classes(gpl_cnf)
        assert set(gpl.names_of(core)) == {"GPL", "Driver", "Benchmark", "GraphType", "Algorithms"}
        assert dead == frozenset()

    def test_dead_feature(self):
        """Test that a feature that can never be selected is dead."""
        model = parse_model("root A\noptional B A\noptional C A\nrequires B C\nexcludes B C\n")
        core, dead = feature_classes(to_cnf(model))
        assert core == {0}
        assert dead == {1}

    def test_void_model(self):
        """Test that an unsatisfiable formula raises VoidModelError."""
        model = parse_model("root A\nmandatory B A\nexcludes B A\n")
        with pytest.raises(VoidModelError):
            feature_classes(to_cnf(model))


class TestDimacs:
    """Test DIMACS export."""

    def test_gpl_dimacs(self, gpl, gpl_cnf):
        """Test the header, name comments and root unit clause."""
        text = to_dimacs(gpl_cnf, list(gpl.feature_list))
        lines = text.splitlines()

        assert lines[0] == "c 1 GPL"
        assert lines[17] == "c 18 Kruskal"
        assert lines[18] == f"p cnf 18 {len(gpl_cnf.clauses)}"
        assert lines[19] == "1 0"
        assert all(line.endswith(" 0") for line in lines[19:])

    def test_dimacs_without_names(self):
        """Test export without comment lines."""
        text = to_dimacs(to_cnf(parse_model("root A\noptional B A\n")))
        assert text == "p cnf 2 2\n1 0\n-2 1 0\n"
