"""
Shared machinery for the covering-array generators.

Holds the generator parameters, the seeded random source, the repair step
that turns arbitrary candidate rows into valid products, and the coverage
tracker used by the constructive algorithms.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import GeneratorConfigError
from ..feature_model import FeatureModel, FeatureSet
from ..sat_core import Assumption, CnfFormula, solve
from ..tset_engine import CoveringArray, GenerationMeta, TSetUniverse

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise GeneratorConfigError(message)


@dataclass
class AnnealingConfig:
    initial_temperature: float = 1.0
    cooling_factor: float = 0.97
    moves_per_temperature: int = 500
    min_temperature: float = 1e-3
    max_restarts: int = 3
    # size attempt abandoned after this many temperature steps without a new best
    stall_temperatures: int = 6
    # 0 means no cap beyond the cooling schedule
    max_moves_per_attempt: int = 0

    def __post_init__(self):
        _require(self.initial_temperature > 0, "initial_temperature must be > 0")
        _require(
            0 < self.cooling_factor < 1, "cooling_factor must be strictly in (0, 1)"
        )
        _require(self.moves_per_temperature > 0, "moves_per_temperature must be > 0")
        _require(
            0 < self.min_temperature < self.initial_temperature,
            "min_temperature must be in (0, initial_temperature)",
        )
        _require(self.max_restarts >= 0, "max_restarts must be >= 0")
        _require(self.stall_temperatures > 0, "stall_temperatures must be > 0")
        _require(self.max_moves_per_attempt >= 0, "max_moves_per_attempt must be >= 0")


@dataclass
class GeneticConfig:
    population_size: int = 50
    crossover_rate: float = 0.9
    # None means 1 / |FL|
    mutation_rate: Optional[float] = None
    generations_per_product: int = 100
    stall_generations: int = 20
    tournament_size: int = 2

    def __post_init__(self):
        _require(self.population_size >= 2, "population_size must be >= 2")
        _require(0 <= self.crossover_rate <= 1, "crossover_rate must be in [0, 1]")
        _require(
            self.mutation_rate is None or 0 <= self.mutation_rate <= 1,
            "mutation_rate must be in [0, 1]",
        )
        _require(self.generations_per_product > 0, "generations_per_product must be > 0")
        _require(self.stall_generations > 0, "stall_generations must be > 0")
        _require(
            1 <= self.tournament_size <= self.population_size,
            "tournament_size must be in [1, population_size]",
        )

    def mutation_for(self, feature_count: int) -> float:
        if self.mutation_rate is not None:
            return self.mutation_rate
        return 1.0 / max(feature_count, 1)


@dataclass
class GreedyConfig:
    # uncovered t-sets considered per product; 0 scans all of them
    candidate_pool: int = 0

    def __post_init__(self):
        _require(self.candidate_pool >= 0, "candidate_pool must be >= 0")


@dataclass
class GeneratorConfig:
    seed: int = 0
    annealing: AnnealingConfig = field(default_factory=AnnealingConfig)
    genetic: GeneticConfig = field(default_factory=GeneticConfig)
    greedy: GreedyConfig = field(default_factory=GreedyConfig)

    def __post_init__(self):
        _require(0 <= self.seed <= MAX_SEED, "seed must be an unsigned 64-bit integer")

    @classmethod
    def from_mapping(
        cls, data: Optional[Mapping[str, Any]] = None, seed: Optional[int] = None
    ) -> "GeneratorConfig":
        """Build a config from (possibly partial) nested overrides."""
        from ..merger import build_structured

        overrides: Dict[str, Any] = dict(data or {})
        if seed is not None:
            overrides["seed"] = seed
        return build_structured(cls, overrides)

    def with_seed(self, seed: int) -> "GeneratorConfig":
        return GeneratorConfig(
            seed=seed, annealing=self.annealing, genetic=self.genetic, greedy=self.greedy
        )


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for (seed, stream); streams give independent sequences."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def tset_assumptions(universe: TSetUniverse, index: int) -> List[Assumption]:
    return [
        Assumption.select(int(f)) if p else Assumption.deselect(int(f))
        for f, p in zip(universe.features[index], universe.polarities[index])
    ]


class ProductRepair:
    """
    Turns candidate rows into valid products.

    Forced literals come from unit propagation of the formula plus any
    assumptions; remaining decisions follow the candidate's own values,
    so a valid candidate comes back unchanged and an invalid one comes
    back with few flips.
    """

    def __init__(self, cnf: CnfFormula, cache_size: int = 100_000):
        self.cnf = cnf
        self.cache_size = cache_size
        self._cache: Dict[Tuple[bytes, Tuple[int, ...]], Optional[np.ndarray]] = {}
        self.calls = 0

    def repair(
        self, candidate: np.ndarray, assumptions: Sequence[Assumption] = ()
    ) -> Optional[np.ndarray]:
        candidate = np.asarray(candidate, dtype=bool)
        key = (candidate.tobytes(), tuple(a.literal for a in assumptions))
        if key in self._cache:
            return self._cache[key]
        self.calls += 1
        solved = solve(self.cnf, assumptions, phase=candidate.tolist())
        result = None
        if solved is not None:
            result = np.array(solved, dtype=bool)
            result.setflags(write=False)
        if len(self._cache) < self.cache_size:
            self._cache[key] = result
        return result

    def random_product(
        self, rng: np.random.Generator, assumptions: Sequence[Assumption] = ()
    ) -> Optional[np.ndarray]:
        return self.repair(rng.random(self.cnf.variable_count) < 0.5, assumptions)


class CoverageTracker:
    """Which universe members are still uncovered by the rows added so far."""

    def __init__(self, universe: TSetUniverse):
        self.universe = universe
        self.uncovered = np.ones(len(universe), dtype=bool)

    @property
    def remaining(self) -> int:
        return int(self.uncovered.sum())

    def gain(self, row: np.ndarray) -> int:
        return int((self.universe.covered_by(row) & self.uncovered).sum())

    def gains(self, rows: np.ndarray) -> np.ndarray:
        return (self.universe.coverage_matrix(rows) & self.uncovered).sum(axis=1)

    def add(self, row: np.ndarray) -> int:
        hit = self.universe.covered_by(row) & self.uncovered
        self.uncovered &= ~hit
        return int(hit.sum())

    def uncovered_indices(self) -> np.ndarray:
        return np.flatnonzero(self.uncovered)


class Stopwatch:
    """Monotonic wall clock around a generator run, reported in whole milliseconds."""

    def __init__(self):
        self._start = time.perf_counter_ns()

    def elapsed_ms(self) -> int:
        return max(1, math.ceil((time.perf_counter_ns() - self._start) / 1e6))


def build_array(
    algorithm: str,
    model: FeatureModel,
    t: int,
    seed: int,
    rows: Sequence[np.ndarray],
    stopwatch: Stopwatch,
) -> CoveringArray:
    generation_ms = stopwatch.elapsed_ms()
    products = tuple(FeatureSet.from_values(row.tolist()) for row in rows)
    logger.info(
        f"{algorithm} produced {len(products)} products for '{model.name}' "
        f"(t={t}, seed={seed}) in {generation_ms} ms"
    )
    return CoveringArray(
        model_name=model.name,
        t=t,
        products=products,
        meta=GenerationMeta(algorithm, seed, generation_ms),
    )
