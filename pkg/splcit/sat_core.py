"""
Propositional encoding of feature models and a small DPLL solver.

Variable ``i`` of a formula is feature ``i`` of the model; clauses use
DIMACS literals, ``+(i + 1)`` for "selected" and ``-(i + 1)`` for "not
selected". The solver branches on the lowest-index unassigned variable and
uses unit propagation only, which is plenty for feature models of a few
dozen features and keeps every query deterministic.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .exceptions import EnumerationOverflowError, ModelValidationError, VoidModelError
from .feature_model import (
    ConstraintKind,
    FeatureModel,
    FeatureSet,
    GroupKind,
    Relation,
)

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 2_000_000

Clause = Tuple[int, ...]


class Assumption(NamedTuple):
    """A literal forced for a single query."""

    literal: int

    @classmethod
    def select(cls, feature: int) -> "Assumption":
        return cls(feature + 1)

    @classmethod
    def deselect(cls, feature: int) -> "Assumption":
        return cls(-(feature + 1))

    @property
    def variable(self) -> int:
        return abs(self.literal) - 1

    @property
    def selected(self) -> bool:
        return self.literal > 0


@dataclass(frozen=True)
class CnfFormula:
    variable_count: int
    clauses: Tuple[Clause, ...]
    # keyed by literal code: indices of clauses holding that literal's negation
    _watch: Tuple[Tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False, default=()
    )
    _units: Tuple[int, ...] = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        clauses = tuple(tuple(clause) for clause in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        watch: List[List[int]] = [[] for _ in range(2 * self.variable_count)]
        units = []
        for index, clause in enumerate(clauses):
            if not clause:
                raise ModelValidationError(f"Clause {index} is empty")
            literals = set(clause)
            for literal in clause:
                if literal == 0 or abs(literal) > self.variable_count:
                    raise ModelValidationError(
                        f"Literal {literal} in clause {index} is out of range"
                    )
                if -literal in literals:
                    raise ModelValidationError(
                        f"Clause {index} contains {literal} and its negation"
                    )
                # the clause loses this literal when its negation is assigned
                watch[_code(-literal)].append(index)
            if len(clause) == 1:
                units.append(clause[0])
        object.__setattr__(self, "_watch", tuple(tuple(w) for w in watch))
        object.__setattr__(self, "_units", tuple(units))


def _code(literal: int) -> int:
    return 2 * (abs(literal) - 1) + (literal < 0)


def to_cnf(model: FeatureModel) -> CnfFormula:
    """Encode a feature model so that its models are exactly the valid products."""

    def lit(index: int, positive: bool = True) -> int:
        return index + 1 if positive else -(index + 1)

    clauses: List[Clause] = [(lit(0),)]
    for index, feature in enumerate(model.features[1:], start=1):
        # child -> parent
        clauses.append((lit(index, False), lit(feature.parent)))
        if feature.relation is Relation.MANDATORY:
            clauses.append((lit(feature.parent, False), lit(index)))
    for group in model.groups:
        clauses.append((lit(group.parent, False),) + tuple(lit(m) for m in group.members))
        if group.kind is GroupKind.XOR:
            members = group.members
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    clauses.append((lit(a, False), lit(b, False)))
    for ctc in model.ctcs:
        if ctc.kind is ConstraintKind.REQUIRES:
            clauses.append((lit(ctc.source, False), lit(ctc.target)))
        else:
            clauses.append((lit(ctc.source, False), lit(ctc.target, False)))
    return CnfFormula(len(model), tuple(clauses))


class _Search:
    """Private search state for one query; never shared between calls."""

    def __init__(self, cnf: CnfFormula):
        self.cnf = cnf
        self.values = [0] * cnf.variable_count
        self.trail: List[int] = []

    def assign(self, literal: int) -> bool:
        var = abs(literal) - 1
        value = 1 if literal > 0 else -1
        current = self.values[var]
        if current:
            return current == value
        self.values[var] = value
        self.trail.append(var)
        return True

    def start(self, assumptions: Iterable[Assumption]) -> bool:
        for literal in self.cnf._units:
            if not self.assign(literal):
                return False
        for assumption in assumptions:
            if not 0 <= assumption.variable < self.cnf.variable_count:
                raise ValueError(f"Assumption {assumption.literal} is out of range")
            if not self.assign(assumption.literal):
                return False
        return self.propagate(0)

    def propagate(self, head: int) -> bool:
        values = self.values
        trail = self.trail
        clauses = self.cnf.clauses
        watch = self.cnf._watch
        while head < len(trail):
            var = trail[head]
            head += 1
            # clauses containing the negation of the literal just made true
            for index in watch[2 * var + (values[var] < 0)]:
                free = 0
                unit = 0
                for literal in clauses[index]:
                    value = values[abs(literal) - 1]
                    if value == 0:
                        free += 1
                        if free > 1:
                            break
                        unit = literal
                    elif (value > 0) == (literal > 0):
                        break
                else:
                    if free == 0:
                        return False
                    self.values[abs(unit) - 1] = 1 if unit > 0 else -1
                    trail.append(abs(unit) - 1)
        return True

    def undo(self, mark: int) -> None:
        for var in self.trail[mark:]:
            self.values[var] = 0
        del self.trail[mark:]

    def next_variable(self) -> Optional[int]:
        for var, value in enumerate(self.values):
            if value == 0:
                return var
        return None

    def all_satisfied(self) -> bool:
        values = self.values
        for clause in self.cnf.clauses:
            for literal in clause:
                value = values[abs(literal) - 1]
                if value and (value > 0) == (literal > 0):
                    break
            else:
                return False
        return True

    def solve(self, phase: Sequence[bool]) -> bool:
        var = self.next_variable()
        if var is None:
            return True
        first = 1 if phase[var] else -1
        for value in (first, -first):
            mark = len(self.trail)
            self.values[var] = value
            self.trail.append(var)
            if self.propagate(mark) and self.solve(phase):
                return True
            self.undo(mark)
        return False

    def enumerate(self, visit: Callable[[List[int]], None]) -> None:
        var = self.next_variable()
        if var is None:
            visit(self.values)
            return
        for value in (-1, 1):
            mark = len(self.trail)
            self.values[var] = value
            self.trail.append(var)
            if self.propagate(mark):
                self.enumerate(visit)
            self.undo(mark)

    def count(self, budget: int, cap: int) -> int:
        """Models below the current trail; budget is what remains of cap."""
        if self.all_satisfied():
            found = 2 ** self.values.count(0)
            if found > budget:
                raise EnumerationOverflowError(cap)
            return found
        var = self.next_variable()
        total = 0
        for value in (-1, 1):
            mark = len(self.trail)
            self.values[var] = value
            self.trail.append(var)
            if self.propagate(mark):
                total += self.count(budget - total, cap)
            self.undo(mark)
        return total


def solve(
    cnf: CnfFormula,
    assumptions: Iterable[Assumption] = (),
    phase: Optional[Sequence[bool]] = None,
) -> Optional[Tuple[bool, ...]]:
    """
    Find one satisfying assignment.

    Args:
        cnf: Formula to satisfy
        assumptions: Literals that must hold
        phase: Preferred value per variable; decisions try it first. An
            assignment that already satisfies the formula and the
            assumptions is returned unchanged.

    Returns:
        Selection flags in variable order, or None when unsatisfiable
    """
    search = _Search(cnf)
    if not search.start(assumptions):
        return None
    if phase is None:
        phase = [False] * cnf.variable_count
    if not search.solve(phase):
        return None
    return tuple(value > 0 for value in search.values)


def is_satisfiable(cnf: CnfFormula, assumptions: Iterable[Assumption] = ()) -> bool:
    """True iff some assignment satisfies every clause and every assumption."""
    return solve(cnf, assumptions) is not None


def count_products(
    model: FeatureModel, cap: int = DEFAULT_ENUMERATION_CAP, cnf: CnfFormula = None
) -> int:
    """
    Count valid products without materialising them.

    Raises:
        EnumerationOverflowError: If the count exceeds cap
    """
    cnf = cnf or to_cnf(model)
    search = _Search(cnf)
    if not search.start(()):
        return 0
    total = search.count(cap, cap)
    logger.debug(f"Model '{model.name}' has {total} products")
    return total


def enumerate_products(
    model: FeatureModel, cap: int = DEFAULT_ENUMERATION_CAP, cnf: CnfFormula = None
) -> List[FeatureSet]:
    """
    All valid products in lexicographic order of the canonical feature order
    (unselected before selected).

    Raises:
        EnumerationOverflowError: If the model has more than cap products
    """
    cnf = cnf or to_cnf(model)
    count_products(model, cap, cnf)
    search = _Search(cnf)
    products: List[FeatureSet] = []
    if search.start(()):
        search.enumerate(
            lambda values: products.append(
                FeatureSet.from_values([value > 0 for value in values])
            )
        )
    return products


def feature_classes(cnf: CnfFormula) -> Tuple[frozenset, frozenset]:
    """
    Core and dead features by satisfiability queries.

    Returns:
        (core, dead): features selected in every product / in none

    Raises:
        VoidModelError: If the formula is unsatisfiable
    """
    if not is_satisfiable(cnf):
        raise VoidModelError("Model has no valid products")
    core = set()
    dead = set()
    for var in range(cnf.variable_count):
        if not is_satisfiable(cnf, [Assumption.deselect(var)]):
            core.add(var)
        elif not is_satisfiable(cnf, [Assumption.select(var)]):
            dead.add(var)
    return frozenset(core), frozenset(dead)


def to_dimacs(cnf: CnfFormula, names: Optional[Sequence[str]] = None) -> str:
    """DIMACS CNF text, with ``c <var> <name>`` comments when names are given."""
    lines = []
    if names is not None:
        lines.extend(f"c {i} {name}" for i, name in enumerate(names, start=1))
    lines.append(f"p cnf {cnf.variable_count} {len(cnf.clauses)}")
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in cnf.clauses)
    return "\n".join(lines) + "\n"
