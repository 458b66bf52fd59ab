"""
Covering-array generators.

Three algorithms share one calling convention,
``(model, t, config, universe=None, cnf=None) -> CoveringArray``:

- ``greedy``: packs uncovered t-sets into one product at a time
- ``annealing``: anneals fixed-size arrays while shrinking the size
- ``genetic``: evolves each product of the array with a genetic algorithm
"""

from typing import Callable, Dict, Optional

from ..feature_model import FeatureModel
from ..sat_core import CnfFormula
from ..tset_engine import CoveringArray, TSetUniverse
from .annealing import generate_annealing
from .common import (
    AnnealingConfig,
    GeneratorConfig,
    GeneticConfig,
    GreedyConfig,
    make_rng,
)
from .genetic import generate_genetic
from .greedy import generate_greedy

Generator = Callable[..., CoveringArray]

ALGORITHMS: Dict[str, Generator] = {
    "annealing": generate_annealing,
    "genetic": generate_genetic,
    "greedy": generate_greedy,
}


def generate(
    algorithm: str,
    model: FeatureModel,
    t: int = 2,
    config: Optional[GeneratorConfig] = None,
    universe: Optional[TSetUniverse] = None,
    cnf: Optional[CnfFormula] = None,
) -> CoveringArray:
    """
    Run one generator by name.

    Raises:
        ValueError: If the algorithm name is unknown
    """
    try:
        generator = ALGORITHMS[algorithm]
    except KeyError:
        known = ", ".join(sorted(ALGORITHMS))
        raise ValueError(f"Unknown algorithm '{algorithm}' (expected one of: {known})")
    return generator(model, t, config, universe=universe, cnf=cnf)


__all__ = [
    "ALGORITHMS",
    "AnnealingConfig",
    "GeneratorConfig",
    "GeneticConfig",
    "GreedyConfig",
    "generate",
    "generate_annealing",
    "generate_genetic",
    "generate_greedy",
    "make_rng",
]
