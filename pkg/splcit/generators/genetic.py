"""
Genetic covering-array construction.

Each product of the array is the winner of a short evolutionary run whose
fitness is the number of still-uncovered t-sets an individual covers.
Individuals are always valid products: offspring produced by uniform
crossover and bit-flip mutation are repaired before evaluation.
"""

import logging
from typing import List, Optional

import numpy as np

from ..feature_model import FeatureModel
from ..sat_core import CnfFormula, to_cnf
from ..tset_engine import CoveringArray, TSetUniverse, enumerate_valid_tsets
from .common import (
    CoverageTracker,
    GeneratorConfig,
    GeneticConfig,
    ProductRepair,
    Stopwatch,
    build_array,
    make_rng,
    tset_assumptions,
)

logger = logging.getLogger(__name__)

GENETIC_STREAM = 3


class _Evolution:
    def __init__(
        self,
        universe: TSetUniverse,
        tracker: CoverageTracker,
        repair: ProductRepair,
        rng: np.random.Generator,
        settings: GeneticConfig,
    ):
        self.universe = universe
        self.tracker = tracker
        self.repair = repair
        self.rng = rng
        self.settings = settings
        self.mutation = settings.mutation_for(universe.feature_count)

    def seed_population(self) -> np.ndarray:
        uncovered = self.tracker.uncovered_indices()
        size = self.universe.feature_count
        population = []
        for _ in range(self.settings.population_size):
            target = int(self.rng.choice(uncovered))
            population.append(
                self.repair.repair(
                    self.rng.random(size) < 0.5,
                    tset_assumptions(self.universe, target),
                )
            )
        return np.array(population, dtype=bool)

    def tournament(self, fitness: np.ndarray) -> int:
        entrants = self.rng.integers(len(fitness), size=self.settings.tournament_size)
        return int(entrants[np.argmax(fitness[entrants])])

    def offspring(self, population: np.ndarray, fitness: np.ndarray) -> np.ndarray:
        first = population[self.tournament(fitness)]
        second = population[self.tournament(fitness)]
        size = len(first)
        if self.rng.random() < self.settings.crossover_rate:
            child = np.where(self.rng.random(size) < 0.5, first, second)
        else:
            child = first.copy()
        child ^= self.rng.random(size) < self.mutation
        return self.repair.repair(child)

    def best_product(self) -> np.ndarray:
        settings = self.settings
        remaining = self.tracker.remaining
        population = self.seed_population()
        fitness = self.tracker.gains(population)
        elite = int(np.argmax(fitness))
        stalled = 0
        for _ in range(settings.generations_per_product):
            if fitness[elite] == remaining or stalled >= settings.stall_generations:
                break
            children = [population[elite]]
            while len(children) < settings.population_size:
                children.append(self.offspring(population, fitness))
            population = np.array(children, dtype=bool)
            previous = int(fitness[elite])
            fitness = self.tracker.gains(population)
            elite = int(np.argmax(fitness))
            stalled = 0 if fitness[elite] > previous else stalled + 1
        return population[elite]


def genetic_rows(
    cnf: CnfFormula,
    universe: TSetUniverse,
    seed: int,
    settings: GeneticConfig,
) -> List[np.ndarray]:
    repair = ProductRepair(cnf)
    tracker = CoverageTracker(universe)
    evolution = _Evolution(universe, tracker, repair, make_rng(seed, GENETIC_STREAM), settings)
    rows: List[np.ndarray] = []
    while tracker.remaining:
        row = evolution.best_product()
        if tracker.gain(row) == 0:
            first = int(tracker.uncovered_indices()[0])
            row = repair.repair(row, tset_assumptions(universe, first))
        rows.append(np.array(row, dtype=bool))
        tracker.add(row)
        logger.debug(f"genetic row {len(rows)}: {tracker.remaining} t-sets left")
    return rows


def generate_genetic(
    model: FeatureModel,
    t: int,
    config: Optional[GeneratorConfig] = None,
    universe: Optional[TSetUniverse] = None,
    cnf: Optional[CnfFormula] = None,
) -> CoveringArray:
    """Build a t-wise covering array one evolved product at a time."""
    config = config or GeneratorConfig()
    cnf = cnf or to_cnf(model)
    if universe is None:
        universe = enumerate_valid_tsets(model, t, cnf)
    stopwatch = Stopwatch()
    rows = genetic_rows(cnf, universe, config.seed, config.genetic)
    return build_array("genetic", model, t, config.seed, rows, stopwatch)
