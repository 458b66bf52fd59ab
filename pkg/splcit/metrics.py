"""
Test-suite metrics: size, generation time, similarity and tuple frequency.

Similarity only looks at selected variant features (features that are
neither core nor dead), compared with the Jaccard index. Tuple frequency
is the share of a suite's products that cover a given t-set.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, List, Tuple

import numpy as np

from .exceptions import UndefinedMetricError
from .feature_model import FeatureModel, FeatureSet, check_dimensions
from .sat_core import feature_classes, to_cnf
from .tset_engine import (
    Suite,
    TSet,
    TSetUniverse,
    covers,
    products_matrix,
    suite_products,
)

logger = logging.getLogger(__name__)

HISTOGRAM_BUCKETS = 10

CSV_HEADER: Tuple[str, ...] = (
    "model",
    "algorithm",
    "seed",
    "size",
    "generation_ms",
    "similarity",
    "mean_tuple_frequency",
) + tuple(f"h{i}" for i in range(HISTOGRAM_BUCKETS))


@lru_cache(maxsize=64)
def variant_set(model: FeatureModel) -> FrozenSet[int]:
    """Features selected in some but not all valid products."""
    core, dead = feature_classes(to_cnf(model))
    return frozenset(range(len(model))) - core - dead


def _require_products(products: Tuple[FeatureSet, ...], metric: str) -> None:
    if not products:
        raise UndefinedMetricError(f"{metric} is undefined for an empty suite")


def test_suite_size(suite: Suite) -> int:
    return len(suite_products(suite))


def variant_features(fs: FeatureSet, model: FeatureModel) -> FrozenSet[int]:
    """Selected variant features of fs."""
    check_dimensions(model, fs)
    return fs.sel & variant_set(model)


def similarity(fs: FeatureSet, gs: FeatureSet, model: FeatureModel) -> float:
    """Jaccard index of the selected variant features; 0.0 when both are empty."""
    a = variant_features(fs, model)
    b = variant_features(gs, model)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def test_suite_similarity(suite: Suite, model: FeatureModel) -> float:
    """
    Mean pairwise similarity over all ordered pairs, diagonal included.

    Raises:
        UndefinedMetricError: If the suite is empty
    """
    products = suite_products(suite)
    _require_products(products, "Test-suite similarity")
    mask = np.zeros(len(model), dtype=bool)
    mask[sorted(variant_set(model))] = True
    chosen = (products_matrix(products, len(model)) & mask).astype(np.int64)
    shared = chosen @ chosen.T
    sizes = chosen.sum(axis=1)
    union = sizes[:, None] + sizes[None, :] - shared
    pairwise = np.divide(
        shared, union, out=np.zeros(shared.shape, dtype=float), where=union > 0
    )
    return float(pairwise.sum() / len(products) ** 2)


def tuple_occurrences(universe: TSetUniverse, suite: Suite) -> np.ndarray:
    """Number of products covering each t-set, in canonical universe order."""
    products = suite_products(suite)
    return universe.coverage_counts(products_matrix(products, universe.feature_count))


def tuple_frequency(ts: TSet, suite: Suite) -> float:
    products = suite_products(suite)
    _require_products(products, "Tuple frequency")
    return sum(1 for fs in products if covers(fs, ts)) / len(products)


def tuple_frequencies(universe: TSetUniverse, suite: Suite) -> np.ndarray:
    products = suite_products(suite)
    _require_products(products, "Tuple frequency")
    return tuple_occurrences(universe, products) / len(products)


def frequency_histogram(universe: TSetUniverse, suite: Suite) -> List[int]:
    """Ten-bucket histogram of tuple frequencies; a frequency of 1 lands in the last bucket."""
    products = suite_products(suite)
    _require_products(products, "Tuple frequency")
    occurrences = tuple_occurrences(universe, products)
    buckets = np.minimum(
        HISTOGRAM_BUCKETS - 1, (HISTOGRAM_BUCKETS * occurrences) // len(products)
    )
    return np.bincount(buckets, minlength=HISTOGRAM_BUCKETS).astype(int).tolist()


def mean_tuple_frequency(universe: TSetUniverse, suite: Suite) -> float:
    """
    Average tuple frequency over the universe, by direct summation.

    Returns 0.0 for an empty universe, where the metric does not apply.
    """
    products = suite_products(suite)
    _require_products(products, "Mean tuple frequency")
    if len(universe) == 0:
        return 0.0
    total = int(tuple_occurrences(universe, products).sum())
    return total / (len(products) * len(universe))


def covered_tuple_count(universe: TSetUniverse, fs: FeatureSet) -> int:
    """How many universe members a single product covers."""
    row = products_matrix([fs], universe.feature_count)[0]
    return int(universe.covered_by(row).sum())


def expected_mean_tuple_frequency(
    feature_count: int, universe_size: int, t: int = 2
) -> float:
    """
    Closed form of the mean tuple frequency.

    A valid product covers exactly one polarity of every t-combination of
    features, and all of those t-sets are valid, so every product covers
    C(|FL|, t) universe members whatever the suite looks like.
    """
    if universe_size == 0:
        return 0.0
    return math.comb(feature_count, t) / universe_size


@dataclass(frozen=True)
class SuiteMetrics:
    size: int
    generation_ms: int
    similarity: float
    tuple_frequencies: Tuple[float, ...]
    frequency_histogram: Tuple[int, ...]
    mean_tuple_frequency: float

    def csv_row(self, model: str, algorithm: str, seed: int) -> List[object]:
        return [
            model,
            algorithm,
            seed,
            self.size,
            self.generation_ms,
            repr(self.similarity),
            repr(self.mean_tuple_frequency),
            *self.frequency_histogram,
        ]


def compute_suite_metrics(
    model: FeatureModel, universe: TSetUniverse, suite: Suite, generation_ms: int = 0
) -> SuiteMetrics:
    """
    All suite metrics at once.

    Args:
        model: Model the suite was generated for
        universe: Valid t-set universe of the model
        suite: Covering array or plain product list
        generation_ms: Generation time; taken from the array's metadata when present

    Raises:
        UndefinedMetricError: If the suite is empty
    """
    products = suite_products(suite)
    _require_products(products, "Suite metrics")
    meta = getattr(suite, "meta", None)
    if meta is not None:
        generation_ms = meta.generation_ms
    occurrences = tuple_occurrences(universe, products)
    k = len(products)
    buckets = np.minimum(HISTOGRAM_BUCKETS - 1, (HISTOGRAM_BUCKETS * occurrences) // k)
    return SuiteMetrics(
        size=k,
        generation_ms=generation_ms,
        similarity=test_suite_similarity(products, model),
        tuple_frequencies=tuple((occurrences / k).tolist()),
        frequency_histogram=tuple(
            np.bincount(buckets, minlength=HISTOGRAM_BUCKETS).astype(int).tolist()
        ),
        mean_tuple_frequency=(
            int(occurrences.sum()) / (k * len(universe)) if len(universe) else 0.0
        ),
    )
