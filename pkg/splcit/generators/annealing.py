"""
Simulated-annealing covering-array construction.

The greedy array built from the same seed is the initial upper bound. The
search then tries smaller sizes: binary search between the t-set lower
bound and the best size found so far, then repeated attempts one row below
the best until a number of consecutive attempts fail. An attempt at size N
anneals an N-row array whose energy is the number of uncovered t-sets; a
move replaces one row by a valid product that covers a random uncovered
t-set while staying as close as possible to the row it replaces.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from ..feature_model import FeatureModel
from ..sat_core import CnfFormula, to_cnf
from ..tset_engine import CoveringArray, TSetUniverse, enumerate_valid_tsets, size_lower_bound
from .common import (
    AnnealingConfig,
    GeneratorConfig,
    ProductRepair,
    Stopwatch,
    build_array,
    make_rng,
    tset_assumptions,
)
from .greedy import GREEDY_STREAM, greedy_rows

logger = logging.getLogger(__name__)

ANNEALING_STREAM = 2


def _shrink(universe: TSetUniverse, rows: np.ndarray, size: int) -> np.ndarray:
    """Drop rows, least unique coverage first, until size rows remain."""
    rows = rows.copy()
    while len(rows) > size:
        matrix = universe.coverage_matrix(rows)
        counts = matrix.sum(axis=0)
        unique = (matrix & (counts == 1)).sum(axis=1)
        rows = np.delete(rows, int(np.argmin(unique)), axis=0)
    return rows


class _SizeAttempt:
    """One annealing run at a fixed array size."""

    def __init__(
        self,
        universe: TSetUniverse,
        repair: ProductRepair,
        rng: np.random.Generator,
        settings: AnnealingConfig,
    ):
        self.universe = universe
        self.repair = repair
        self.rng = rng
        self.settings = settings

    def run(self, rows: np.ndarray) -> Optional[np.ndarray]:
        universe = self.universe
        settings = self.settings
        rows = rows.copy()
        counts = universe.coverage_counts(rows)
        energy = int((counts == 0).sum())
        best_energy = energy
        temperature = settings.initial_temperature
        stalled = 0
        moves = 0
        while energy and temperature > settings.min_temperature:
            improved = False
            for _ in range(settings.moves_per_temperature):
                if settings.max_moves_per_attempt and moves >= settings.max_moves_per_attempt:
                    return None
                moves += 1
                uncovered = np.flatnonzero(counts == 0)
                target = int(self.rng.choice(uncovered))
                slot = int(self.rng.integers(len(rows)))
                replacement = self.repair.repair(
                    rows[slot], tset_assumptions(universe, target)
                )
                if replacement is None:
                    continue
                trial = (
                    counts
                    - universe.covered_by(rows[slot])
                    + universe.covered_by(replacement)
                )
                delta = int((trial == 0).sum()) - energy
                if delta <= 0 or self.rng.random() < math.exp(-delta / temperature):
                    rows[slot] = replacement
                    counts = trial
                    energy += delta
                    if energy < best_energy:
                        best_energy = energy
                        improved = True
                    if energy == 0:
                        return rows
            stalled = 0 if improved else stalled + 1
            if stalled >= settings.stall_temperatures:
                break
            temperature *= settings.cooling_factor
        return rows if energy == 0 else None


def annealing_rows(
    cnf: CnfFormula,
    universe: TSetUniverse,
    seed: int,
    settings: AnnealingConfig,
) -> List[np.ndarray]:
    repair = ProductRepair(cnf)
    best = np.array(
        greedy_rows(cnf, universe, make_rng(seed, GREEDY_STREAM), repair=repair),
        dtype=bool,
    ).reshape(-1, universe.feature_count)
    if len(universe) == 0:
        return list(best)
    lower = size_lower_bound(universe)
    annealer = _SizeAttempt(universe, repair, make_rng(seed, ANNEALING_STREAM), settings)

    def attempt(size: int) -> Optional[np.ndarray]:
        found = annealer.run(_shrink(universe, best, size))
        logger.debug(f"annealing attempt at {size} rows: {'ok' if found is not None else 'failed'}")
        return found

    low, high = lower, len(best) - 1
    while low <= high:
        size = (low + high) // 2
        found = attempt(size)
        if found is None:
            low = size + 1
        else:
            best = found
            high = size - 1

    failures = 0
    while failures < settings.max_restarts and len(best) - 1 >= lower:
        found = attempt(len(best) - 1)
        if found is None:
            failures += 1
        else:
            best = found
            failures = 0
    return list(best)


def generate_annealing(
    model: FeatureModel,
    t: int,
    config: Optional[GeneratorConfig] = None,
    universe: Optional[TSetUniverse] = None,
    cnf: Optional[CnfFormula] = None,
) -> CoveringArray:
    """Build a t-wise covering array by simulated annealing over array sizes."""
    config = config or GeneratorConfig()
    cnf = cnf or to_cnf(model)
    if universe is None:
        universe = enumerate_valid_tsets(model, t, cnf)
    stopwatch = Stopwatch()
    rows = annealing_rows(cnf, universe, config.seed, config.annealing)
    return build_array("annealing", model, t, config.seed, rows, stopwatch)
