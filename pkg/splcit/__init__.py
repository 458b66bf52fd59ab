"""
splcit - combinatorial interaction testing for software product lines.

This package provides:
- Feature models (.fm files) with a propositional encoding and a DPLL solver
- Valid t-set universes and covering-array verification
- Greedy, simulated-annealing and genetic covering-array generators
- Suite metrics: size, generation time, similarity, tuple frequency
- Statistical comparison (Wilcoxon rank-sum, Vargha-Delaney A12, Spearman)
- A seeded benchmark protocol with CSV reports
"""

import logging

from .exceptions import (
    IncompleteCoveringArrayError,
    ModelError,
    ModelParseError,
    SplcitError,
    VoidModelError,
)
from .feature_model import FeatureModel, FeatureSet, load_model, parse_model
from .generators import GeneratorConfig, generate
from .tset_engine import CoveringArray, TSet, enumerate_valid_tsets, verify_covering_array

# Add NullHandler to prevent "No handler found" warnings
# Applications using this library should configure their own handlers
logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.4.0"
__all__ = [
    "CoveringArray",
    "FeatureModel",
    "FeatureSet",
    "GeneratorConfig",
    "IncompleteCoveringArrayError",
    "ModelError",
    "ModelParseError",
    "SplcitError",
    "TSet",
    "VoidModelError",
    "enumerate_valid_tsets",
    "generate",
    "load_model",
    "parse_model",
    "verify_covering_array",
]
