"""
Deterministic family of synthetic feature models.

A synthetic model is fully determined by its parameters. The tree is built
in declaration order, so every parent precedes its children and the members
of a group are contiguous; cross-tree constraints are then added between
features that are not ancestor-related, keeping only those that leave the
model satisfiable and free of dead features.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Set, Tuple, Union

from .exceptions import ModelValidationError, VoidModelError
from .feature_model import (
    ConstraintKind,
    CrossTreeConstraint,
    Feature,
    FeatureGroup,
    FeatureModel,
    GroupKind,
    Relation,
    serialize_model,
)
from .generators.common import make_rng
from .sat_core import feature_classes, to_cnf

logger = logging.getLogger(__name__)

SYNTHETIC_STREAM = 7
MAX_GROUP_SIZE = 4
ATTEMPTS_PER_CONSTRAINT = 20

_NAME = re.compile(r"^[A-Za-z0-9_.\-]+$")


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Parameters of one synthetic model.

    Attributes:
        name: Model name, also used as the file stem
        features: Number of features including the root
        seed: Random seed
        group_ratio: Chance that a new attachment is an xor/or group
        xor_share: Share of groups that are xor rather than or
        mandatory_ratio: Chance that a single child is mandatory
        ctc_density: Cross-tree constraints per feature
    """

    name: str
    features: int
    seed: int = 0
    group_ratio: float = 0.3
    xor_share: float = 0.5
    mandatory_ratio: float = 0.25
    ctc_density: float = 0.1

    def __post_init__(self):
        if not _NAME.match(self.name):
            raise ModelValidationError(
                f"Synthetic model name '{self.name}' must be a single word"
            )
        if self.features < 1:
            raise ModelValidationError("A synthetic model needs at least 1 feature")
        if self.seed < 0:
            raise ModelValidationError("Synthetic model seed must be >= 0")
        for key in ("group_ratio", "xor_share", "mandatory_ratio"):
            value = getattr(self, key)
            if not 0.0 <= value <= 1.0:
                raise ModelValidationError(f"{key} must be in [0, 1], got {value}")
        if self.ctc_density < 0:
            raise ModelValidationError("ctc_density must be >= 0")


def _build_tree(spec: SyntheticSpec, rng) -> FeatureModel:
    count = spec.features
    parents: List[Optional[int]] = [None]
    relations: List[Relation] = [Relation.ROOT]
    member_of: List[Optional[int]] = [None]
    groups: List[FeatureGroup] = []
    while len(parents) < count:
        index = len(parents)
        remaining = count - index
        parent = int(rng.integers(index))
        if remaining >= 2 and rng.random() < spec.group_ratio:
            size = int(rng.integers(2, min(MAX_GROUP_SIZE, remaining) + 1))
            kind = GroupKind.XOR if rng.random() < spec.xor_share else GroupKind.OR
            relation = Relation.XOR if kind is GroupKind.XOR else Relation.OR
            members = tuple(range(index, index + size))
            for _ in members:
                parents.append(parent)
                relations.append(relation)
                member_of.append(len(groups))
            groups.append(FeatureGroup(parent, kind, members))
        else:
            parents.append(parent)
            member_of.append(None)
            relations.append(
                Relation.MANDATORY
                if rng.random() < spec.mandatory_ratio
                else Relation.OPTIONAL
            )
    features = tuple(
        Feature("Root" if i == 0 else f"F{i}", parents[i], relations[i], member_of[i])
        for i in range(count)
    )
    return FeatureModel(name=spec.name, features=features, groups=tuple(groups))


def _acceptable(model: FeatureModel) -> bool:
    try:
        _, dead = feature_classes(to_cnf(model))
    except VoidModelError:
        return False
    return not dead


def synthetic_model(spec: SyntheticSpec) -> FeatureModel:
    """Build the synthetic model described by spec."""
    rng = make_rng(spec.seed, SYNTHETIC_STREAM)
    model = _build_tree(spec, rng)
    count = len(model)
    wanted = round(spec.ctc_density * count)
    ctcs: List[CrossTreeConstraint] = []
    used: Set[Tuple[int, int]] = set()
    attempts = 0
    while count > 2 and len(ctcs) < wanted and attempts < wanted * ATTEMPTS_PER_CONSTRAINT:
        attempts += 1
        a, b = (int(v) for v in rng.choice(range(1, count), size=2, replace=False))
        if (min(a, b), max(a, b)) in used:
            continue
        if model.is_ancestor(a, b) or model.is_ancestor(b, a):
            continue
        kind = ConstraintKind.REQUIRES if rng.random() < 0.5 else ConstraintKind.EXCLUDES
        candidate = FeatureModel(
            name=model.name,
            features=model.features,
            groups=model.groups,
            ctcs=tuple(ctcs) + (CrossTreeConstraint(kind, a, b),),
        )
        if _acceptable(candidate):
            ctcs.append(CrossTreeConstraint(kind, a, b))
            used.add((min(a, b), max(a, b)))
    if len(ctcs) < wanted:
        logger.info(
            f"Synthetic model '{spec.name}': kept {len(ctcs)} of {wanted} constraints"
        )
    result = FeatureModel(
        name=model.name, features=model.features, groups=model.groups, ctcs=tuple(ctcs)
    )
    logger.debug(
        f"Synthetic model '{spec.name}': {count} features, {len(result.groups)} groups, "
        f"{len(result.ctcs)} constraints"
    )
    return result


def write_synthetic_model(spec: SyntheticSpec, path: Union[str, Path]) -> Path:
    """Write the synthetic model to a ``.fm`` file and return the path."""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(serialize_model(synthetic_model(spec)), encoding="utf-8")
    logger.info(f"Wrote synthetic model '{spec.name}' to {file_path}")
    return file_path
