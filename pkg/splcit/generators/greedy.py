"""
Greedy covering-array construction.

Products are built one at a time. Each product starts as an arbitrary valid
product and then absorbs uncovered t-sets, in a seeded shuffled order, as
long as the solver can extend the literals fixed so far with the next
t-set's literals. A t-set the current product already covers is absorbed
without a solver call.
"""

import logging
from typing import List, Optional

import numpy as np

from ..feature_model import FeatureModel
from ..sat_core import Assumption, CnfFormula, solve, to_cnf
from ..tset_engine import CoveringArray, TSetUniverse, enumerate_valid_tsets
from .common import (
    CoverageTracker,
    GeneratorConfig,
    ProductRepair,
    Stopwatch,
    build_array,
    make_rng,
    tset_assumptions,
)

logger = logging.getLogger(__name__)

GREEDY_STREAM = 1


def _pack_product(
    cnf: CnfFormula,
    universe: TSetUniverse,
    tracker: CoverageTracker,
    repair: ProductRepair,
    rng: np.random.Generator,
    candidate_pool: int,
) -> np.ndarray:
    order = rng.permutation(tracker.uncovered_indices())
    if candidate_pool:
        order = order[:candidate_pool]
    current = repair.random_product(rng)
    product = current.tolist()
    # 1 selected, -1 deselected, 0 free
    fixed = [0] * universe.feature_count
    assumptions: List[Assumption] = []
    features = universe.features
    polarities = universe.polarities
    for index in order.tolist():
        wanted = [
            (f, 1 if p else -1)
            for f, p in zip(features[index].tolist(), polarities[index].tolist())
        ]
        if any(fixed[f] == -v for f, v in wanted):
            continue
        new = [(f, v) for f, v in wanted if fixed[f] == 0]
        if not new:
            continue
        extra = [Assumption(v * (f + 1)) for f, v in new]
        if not all(product[f] == (v > 0) for f, v in new):
            solved = solve(cnf, assumptions + extra, phase=product)
            if solved is None:
                continue
            product = list(solved)
        assumptions.extend(extra)
        for f, v in new:
            fixed[f] = v
    return np.array(product, dtype=bool)


def greedy_rows(
    cnf: CnfFormula,
    universe: TSetUniverse,
    rng: np.random.Generator,
    candidate_pool: int = 0,
    repair: Optional[ProductRepair] = None,
) -> List[np.ndarray]:
    """Rows of a complete covering array for the universe."""
    repair = repair or ProductRepair(cnf)
    tracker = CoverageTracker(universe)
    rows: List[np.ndarray] = []
    while tracker.remaining:
        row = _pack_product(cnf, universe, tracker, repair, rng, candidate_pool)
        if tracker.gain(row) == 0:
            # a truncated pool can miss everything; fall back to a witness
            first = int(tracker.uncovered_indices()[0])
            row = np.array(repair.repair(row, tset_assumptions(universe, first)))
        rows.append(row)
        tracker.add(row)
        logger.debug(f"greedy row {len(rows)}: {tracker.remaining} t-sets left")
    return rows


def generate_greedy(
    model: FeatureModel,
    t: int,
    config: Optional[GeneratorConfig] = None,
    universe: Optional[TSetUniverse] = None,
    cnf: Optional[CnfFormula] = None,
) -> CoveringArray:
    """
    Build a t-wise covering array greedily.

    Args:
        model: Feature model
        t: Interaction strength
        config: Generator parameters; seed and greedy.candidate_pool are used
        universe: Precomputed valid t-set universe for (model, t)
        cnf: Precomputed encoding of model

    Returns:
        Complete covering array with generation metadata
    """
    config = config or GeneratorConfig()
    cnf = cnf or to_cnf(model)
    if universe is None:
        universe = enumerate_valid_tsets(model, t, cnf)
    stopwatch = Stopwatch()
    rng = make_rng(config.seed, GREEDY_STREAM)
    rows = greedy_rows(cnf, universe, rng, config.greedy.candidate_pool)
    return build_array("greedy", model, t, config.seed, rows, stopwatch)
