"""
t-sets, the valid t-set universe, covering arrays and their file format.

A t-set fixes the polarity of exactly ``t`` features. The universe of a
model lists every valid t-set in canonical order: ascending feature tuple,
then polarity bitmask, where the bitmask reads the tuple's polarities as a
binary number with the first feature as the most significant bit.

Coverage bookkeeping is vectorised: the universe keeps a ``(m, t)`` array of
feature indices and a matching boolean array of polarities, so the t-sets a
product covers are ``(row[features] == polarities).all(axis=1)``.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .exceptions import DimensionMismatchError, SuiteFormatError
from .feature_model import FeatureModel, FeatureSet, check_dimensions, validate_feature_set
from .sat_core import Assumption, CnfFormula, solve, to_cnf

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TSet:
    """A partial configuration: features forced selected / not selected."""

    sel: FrozenSet[int]
    notsel: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "sel", frozenset(self.sel))
        object.__setattr__(self, "notsel", frozenset(self.notsel))
        if self.sel & self.notsel:
            raise ValueError(f"Features {sorted(self.sel & self.notsel)} appear twice")

    @property
    def t(self) -> int:
        return len(self.sel) + len(self.notsel)

    @property
    def features(self) -> Tuple[int, ...]:
        return tuple(sorted(self.sel | self.notsel))

    @property
    def polarity_mask(self) -> int:
        mask = 0
        for feature in self.features:
            mask = (mask << 1) | (feature in self.sel)
        return mask

    @property
    def sort_key(self) -> Tuple[Tuple[int, ...], int]:
        return self.features, self.polarity_mask

    def assumptions(self) -> List[Assumption]:
        return [
            Assumption.select(f) if f in self.sel else Assumption.deselect(f)
            for f in self.features
        ]

    @classmethod
    def from_polarities(
        cls, features: Sequence[int], polarities: Sequence[bool]
    ) -> "TSet":
        sel = {f for f, p in zip(features, polarities) if p}
        return cls(frozenset(sel), frozenset(features) - sel)

    def describe(self, model: FeatureModel) -> str:
        sel = ", ".join(model.names_of(self.sel))
        notsel = ", ".join(model.names_of(self.notsel))
        return f"[{{{sel}}}, {{{notsel}}}]"


@dataclass(frozen=True)
class TSetUniverse:
    """All valid t-sets of a model in canonical order."""

    t: int
    feature_count: int
    tsets: Tuple[TSet, ...]
    index: Dict[TSet, int] = field(init=False, repr=False, compare=False)
    features: np.ndarray = field(init=False, repr=False, compare=False)
    polarities: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {ts: i for i, ts in enumerate(self.tsets)}
        if len(index) != len(self.tsets):
            raise ValueError("Universe contains duplicate t-sets")
        features = np.array(
            [ts.features for ts in self.tsets], dtype=np.intp
        ).reshape(len(self.tsets), self.t)
        polarities = np.array(
            [[f in ts.sel for f in ts.features] for ts in self.tsets], dtype=bool
        ).reshape(len(self.tsets), self.t)
        features.setflags(write=False)
        polarities.setflags(write=False)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "polarities", polarities)

    def __len__(self) -> int:
        return len(self.tsets)

    def __iter__(self):
        return iter(self.tsets)

    def covered_by(self, row: np.ndarray) -> np.ndarray:
        """Boolean vector over the universe: t-sets covered by one product row."""
        if len(self.tsets) == 0:
            return np.zeros(0, dtype=bool)
        return (row[self.features] == self.polarities).all(axis=1)

    def coverage_matrix(self, rows: np.ndarray) -> np.ndarray:
        """``(k, m)`` boolean matrix: which t-sets each of k rows covers."""
        rows = np.asarray(rows, dtype=bool).reshape(-1, self.feature_count)
        if len(self.tsets) == 0:
            return np.zeros((rows.shape[0], 0), dtype=bool)
        return (rows[:, self.features] == self.polarities).all(axis=2)

    def coverage_counts(self, rows: np.ndarray) -> np.ndarray:
        """How many of the rows cover each t-set."""
        return self.coverage_matrix(rows).sum(axis=0)


@dataclass(frozen=True)
class GenerationMeta:
    algorithm: str
    seed: int
    generation_ms: int


@dataclass(frozen=True)
class CoveringArray:
    """Ordered products plus generation metadata. Completeness is checked separately."""

    model_name: str
    t: int
    products: Tuple[FeatureSet, ...]
    meta: GenerationMeta

    def __len__(self) -> int:
        return len(self.products)

    def as_matrix(self, feature_count: int) -> np.ndarray:
        return products_matrix(self.products, feature_count)


@dataclass(frozen=True)
class Verification:
    invalid_rows: Tuple[int, ...]
    uncovered: Tuple[TSet, ...]

    @property
    def ok(self) -> bool:
        return not self.invalid_rows and not self.uncovered


Suite = Union[CoveringArray, Sequence[FeatureSet]]


def suite_products(suite: Suite) -> Tuple[FeatureSet, ...]:
    if isinstance(suite, CoveringArray):
        return suite.products
    return tuple(suite)


def products_matrix(products: Sequence[FeatureSet], feature_count: int) -> np.ndarray:
    matrix = np.zeros((len(products), feature_count), dtype=bool)
    for row, fs in enumerate(products):
        if fs.size != feature_count:
            raise DimensionMismatchError(
                f"Product {row} assigns {fs.size} features, expected {feature_count}"
            )
        matrix[row, sorted(fs.sel)] = True
    return matrix


def covers(fs: FeatureSet, ts: TSet) -> bool:
    """
    True iff the t-set's selections and deselections agree with the feature set.

    Raises:
        DimensionMismatchError: If ts names a feature outside fs
    """
    if max(ts.sel | ts.notsel, default=-1) >= fs.size:
        raise DimensionMismatchError(
            f"t-set references feature {max(ts.sel | ts.notsel)} but the feature "
            f"set has {fs.size} features"
        )
    return ts.sel <= fs.sel and ts.notsel <= fs.notsel


def is_valid_tset(model: FeatureModel, ts: TSet, cnf: Optional[CnfFormula] = None) -> bool:
    """True iff some valid product covers ts."""
    cnf = cnf or to_cnf(model)
    return solve(cnf, ts.assumptions()) is not None


def enumerate_valid_tsets(
    model: FeatureModel, t: int, cnf: Optional[CnfFormula] = None
) -> TSetUniverse:
    """
    Build the universe of valid t-sets.

    Every candidate (feature combination × polarity) is checked with the
    solver unless an earlier witness product already covers it; each
    witness marks everything it covers as valid.
    """
    count = len(model)
    if not 1 <= t <= count:
        raise ValueError(f"t must be in [1, {count}], got {t}")
    cnf = cnf or to_cnf(model)

    combos = np.array(list(itertools.combinations(range(count), t)), dtype=np.intp)
    masks = np.arange(2**t)
    # polarity bit for position k is bit (t - 1 - k) of the mask
    bits = ((masks[:, None] >> np.arange(t - 1, -1, -1)) & 1).astype(bool)
    features = np.repeat(combos, len(masks), axis=0)
    polarities = np.tile(bits, (len(combos), 1))

    valid = np.zeros(len(features), dtype=bool)
    decided = np.zeros(len(features), dtype=bool)
    rng = np.random.Generator(np.random.PCG64(0))
    queries = 0
    for i in range(len(features)):
        if decided[i]:
            continue
        queries += 1
        assumptions = [
            Assumption.select(int(f)) if p else Assumption.deselect(int(f))
            for f, p in zip(features[i], polarities[i])
        ]
        witness = solve(cnf, assumptions, phase=rng.random(count) < 0.5)
        if witness is None:
            decided[i] = True
            continue
        row = np.array(witness, dtype=bool)
        hit = (row[features] == polarities).all(axis=1)
        valid |= hit
        decided |= hit

    tsets = tuple(
        TSet.from_polarities(features[i].tolist(), polarities[i].tolist())
        for i in np.flatnonzero(valid)
    )
    logger.debug(
        f"Model '{model.name}': {len(tsets)} valid {t}-sets out of "
        f"{len(features)} candidates ({queries} solver queries)"
    )
    return TSetUniverse(t=t, feature_count=count, tsets=tsets)


def tsets_covered_by(products: Iterable[FeatureSet], t: int) -> Set[TSet]:
    """Every t-set covered by at least one of the products (brute force)."""
    covered: Set[TSet] = set()
    for fs in products:
        values = fs.values()
        for combo in itertools.combinations(range(len(values)), t):
            covered.add(TSet.from_polarities(combo, [values[f] for f in combo]))
    return covered


def coverage_gap(universe: TSetUniverse, products: Suite) -> Set[TSet]:
    """Universe members covered by none of the products."""
    rows = products_matrix(suite_products(products), universe.feature_count)
    counts = universe.coverage_counts(rows)
    return {universe.tsets[i] for i in np.flatnonzero(counts == 0)}


def size_lower_bound(universe: TSetUniverse) -> int:
    """Largest number of valid polarities sharing one feature tuple."""
    if len(universe) == 0:
        return 1
    _, counts = np.unique(universe.features, axis=0, return_counts=True)
    return int(counts.max())


def verify_covering_array(
    model: FeatureModel, universe: TSetUniverse, products: Suite
) -> Verification:
    """Check row validity and completeness of a candidate covering array."""
    rows = suite_products(products)
    invalid = []
    for i, fs in enumerate(rows):
        check_dimensions(model, fs)
        if not validate_feature_set(model, fs):
            invalid.append(i)
    uncovered = sorted(coverage_gap(universe, rows), key=lambda ts: ts.sort_key)
    return Verification(tuple(invalid), tuple(uncovered))


# ---------------------------------------------------------------------------
# Covering-array files
# ---------------------------------------------------------------------------

_HEADER = re.compile(
    r"^ca\s+(?P<model>\S+)\s+t=(?P<t>\d+)\s+algo=(?P<algo>\S+)"
    r"\s+seed=(?P<seed>\d+)\s+ms=(?P<ms>\d+)\s*$"
)


def format_covering_array(model: FeatureModel, ca: CoveringArray) -> str:
    lines = [
        f"ca {ca.model_name} t={ca.t} algo={ca.meta.algorithm} "
        f"seed={ca.meta.seed} ms={ca.meta.generation_ms}"
    ]
    for fs in ca.products:
        lines.append(" ".join(model.names_of(fs.sel)))
    return "\n".join(lines) + "\n"


def write_covering_array(
    model: FeatureModel, ca: CoveringArray, path: Union[str, Path]
) -> Path:
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(format_covering_array(model, ca), encoding="utf-8")
    return file_path


def parse_covering_array(model: FeatureModel, text: str) -> CoveringArray:
    """
    Parse covering-array text against a model.

    Raises:
        SuiteFormatError: On a malformed header or an unknown feature name
    """
    lines = [line for line in text.splitlines()]
    if not lines:
        raise SuiteFormatError("empty covering-array file", 1)
    match = _HEADER.match(lines[0].strip())
    if not match:
        raise SuiteFormatError(f"malformed header '{lines[0].strip()}'", 1)
    products = []
    for number, line in enumerate(lines[1:], start=2):
        names = line.split()
        if not names:
            continue
        try:
            selected = {model.index_of(name) for name in names}
        except KeyError as e:
            raise SuiteFormatError(str(e.args[0]), number) from e
        products.append(FeatureSet.from_selected(selected, len(model)))
    return CoveringArray(
        model_name=match["model"],
        t=int(match["t"]),
        products=tuple(products),
        meta=GenerationMeta(match["algo"], int(match["seed"]), int(match["ms"])),
    )


def read_covering_array(model: FeatureModel, path: Union[str, Path]) -> CoveringArray:
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as e:
        raise SuiteFormatError(f"cannot read {file_path}: {e}") from e
    return parse_covering_array(model, text)
