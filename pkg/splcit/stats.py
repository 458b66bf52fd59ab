"""
Statistics for comparing algorithms over independent runs.

- Wilcoxon rank-sum test (two-sided), exact for small tie-free samples
- Vargha-Delaney A12 effect size
- Spearman rank correlation
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm, rankdata

from .exceptions import UndefinedCorrelationError

logger = logging.getLogger(__name__)

EXACT_LIMIT = 12
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class Sample:
    """Values from independent runs, labelled (algorithm, model, metric)."""

    values: Tuple[float, ...]
    label: Tuple[str, str, str] = ("", "", "")

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


Values = Union[Sample, Sequence[float], np.ndarray]


def _as_array(sample: Values, name: str) -> np.ndarray:
    raw = sample.values if isinstance(sample, Sample) else sample
    values = np.asarray(raw, dtype=float).ravel()
    if values.size == 0:
        raise ValueError(f"Sample '{name}' is empty")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"Sample '{name}' contains non-finite values")
    return values


def wilcoxon_rank_sum(a: Values, b: Values) -> float:
    """
    Two-sided p-value of the Wilcoxon rank-sum test.

    The null distribution is enumerated exactly when the pooled sample has
    at most 12 values and no ties. Otherwise the normal approximation is
    used with tie and continuity corrections. Identical pooled values give
    p = 1.
    """
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    n1, n2 = len(x), len(y)
    total = n1 + n2
    pooled = np.concatenate([x, y])
    if np.all(pooled == pooled[0]):
        return 1.0
    ranks = rankdata(pooled)
    observed = float(ranks[:n1].sum())
    distinct, tie_counts = np.unique(pooled, return_counts=True)

    if total <= EXACT_LIMIT and len(distinct) == total:
        statistic = int(round(observed))
        sums = [sum(c) for c in itertools.combinations(range(1, total + 1), n1)]
        lower = sum(1 for s in sums if s <= statistic)
        upper = sum(1 for s in sums if s >= statistic)
        return min(1.0, 2 * min(lower, upper) / len(sums))

    mean = n1 * (total + 1) / 2
    tie_term = float((tie_counts**3 - tie_counts).sum()) / (total * (total - 1))
    variance = n1 * n2 / 12 * ((total + 1) - tie_term)
    if variance <= 0:
        return 1.0
    z = max(abs(observed - mean) - 0.5, 0.0) / math.sqrt(variance)
    return float(min(1.0, 2 * norm.sf(z)))


def _a12_fraction(x: np.ndarray, y: np.ndarray) -> Fraction:
    greater = int((x[:, None] > y[None, :]).sum())
    equal = int((x[:, None] == y[None, :]).sum())
    return Fraction(2 * greater + equal, 2 * len(x) * len(y))


def a12(a: Values, b: Values) -> float:
    """
    Vargha-Delaney A12: probability that a run of A scores higher than a run of B,
    counting ties as one half.
    """
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    value = _a12_fraction(x, y)
    if value < Fraction(1, 2):
        # computed from the larger side so that a12(a, b) + a12(b, a) == 1.0
        return 1.0 - float(_a12_fraction(y, x))
    return float(value)


def a12_magnitude(value: float) -> str:
    """Vargha-Delaney label for an A12 value, symmetric around 0.5."""
    distance = max(value, 1.0 - value)
    if distance > 0.71:
        return "large"
    if distance > 0.64:
        return "medium"
    if distance > 0.56:
        return "small"
    return "negligible"


def spearman(x: Values, y: Values) -> float:
    """
    Spearman rank correlation: Pearson correlation of average ranks.

    Raises:
        ValueError: If the samples differ in length or have fewer than 2 values
        UndefinedCorrelationError: If either sample is constant
    """
    u = _as_array(x, "x")
    v = _as_array(y, "y")
    if len(u) != len(v):
        raise ValueError(f"Samples differ in length: {len(u)} vs {len(v)}")
    if len(u) < 2:
        raise ValueError("Spearman correlation needs at least 2 paired values")
    ru = rankdata(u)
    rv = rankdata(v)
    du = ru - ru.mean()
    dv = rv - rv.mean()
    denominator = math.sqrt(float((du**2).sum()) * float((dv**2).sum()))
    if denominator == 0:
        raise UndefinedCorrelationError(
            "Spearman correlation is undefined for a constant sample"
        )
    return float(np.clip(float((du * dv).sum()) / denominator, -1.0, 1.0))


@dataclass(frozen=True)
class PairwiseTestResult:
    p_value: float
    a12: float
    n1: int
    n2: int
    significant: bool

    @property
    def magnitude(self) -> str:
        return a12_magnitude(self.a12)


def compare(a: Values, b: Values, alpha: float = DEFAULT_ALPHA) -> PairwiseTestResult:
    """Rank-sum test and effect size of sample a against sample b."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    p_value = wilcoxon_rank_sum(x, y)
    return PairwiseTestResult(
        p_value=p_value,
        a12=a12(x, y),
        n1=len(x),
        n2=len(y),
        significant=p_value < alpha,
    )
