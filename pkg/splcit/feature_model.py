"""
Feature models, feature lists and feature sets.

A feature model is a tree of features with mandatory, optional, xor-group
and or-group relations plus requires/excludes cross-tree constraints. All
downstream modules address features by their index in the model's feature
list (declaration order); names are only used at the edges.

The ``.fm`` text format is line oriented, one statement per line, with
``#`` comments::

    model <name>
    root <feature>
    mandatory <child> <parent> | optional <child> <parent>
    xor <parent> <child1> <child2> ... | or <parent> <child1> <child2> ...
    requires <a> <b> | excludes <a> <b>
    alias <alias> <feature>

``model`` (optional) and ``root`` come first. Group lines declare their
children and may name a parent that is declared further down; every other
statement must reference features that are already declared.
"""

import enum
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .exceptions import (
    DimensionMismatchError,
    ModelParseError,
    ModelValidationError,
    VoidModelError,
)

logger = logging.getLogger(__name__)


class Relation(enum.Enum):
    """How a feature hangs off its parent."""

    ROOT = "root"
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    XOR = "xor"
    OR = "or"


class GroupKind(enum.Enum):
    XOR = "xor"
    OR = "or"


class ConstraintKind(enum.Enum):
    REQUIRES = "requires"
    EXCLUDES = "excludes"


@dataclass(frozen=True)
class Feature:
    name: str
    parent: Optional[int]
    relation: Relation
    group: Optional[int] = None


@dataclass(frozen=True)
class FeatureGroup:
    parent: int
    kind: GroupKind
    members: Tuple[int, ...]


@dataclass(frozen=True)
class CrossTreeConstraint:
    kind: ConstraintKind
    source: int
    target: int

    def __post_init__(self):
        if self.source == self.target:
            raise ModelValidationError(
                f"Cross-tree constraint '{self.kind.value}' relates feature "
                f"{self.source} to itself"
            )


@dataclass(frozen=True)
class FeatureList:
    """Ordered feature names; positions are the canonical feature indices."""

    names: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ModelValidationError("Feature names must be unique")
        if any(not name for name in self.names):
            raise ModelValidationError("Feature names must be non-empty")

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __getitem__(self, index: int) -> str:
        return self.names[index]

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class FeatureSet:
    """A product: total assignment of the feature list into selected / not selected."""

    sel: FrozenSet[int]
    notsel: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "sel", frozenset(self.sel))
        object.__setattr__(self, "notsel", frozenset(self.notsel))
        if self.sel & self.notsel:
            raise ValueError(
                f"Features {sorted(self.sel & self.notsel)} are both selected "
                f"and not selected"
            )

    @classmethod
    def from_selected(cls, selected: Iterable[int], size: int) -> "FeatureSet":
        chosen = frozenset(selected)
        return cls(chosen, frozenset(range(size)) - chosen)

    @classmethod
    def from_values(cls, values: Sequence[bool]) -> "FeatureSet":
        return cls.from_selected(
            (i for i, value in enumerate(values) if value), len(values)
        )

    @property
    def size(self) -> int:
        return len(self.sel) + len(self.notsel)

    def values(self) -> Tuple[bool, ...]:
        """Selection flags in canonical feature order."""
        size = self.size
        if max(self.sel | self.notsel, default=-1) != size - 1:
            raise DimensionMismatchError(
                "Feature set does not assign a contiguous feature index range"
            )
        return tuple(i in self.sel for i in range(size))


@dataclass(frozen=True)
class FeatureModel:
    """Immutable feature model; feature 0 is the root."""

    name: str
    features: Tuple[Feature, ...]
    groups: Tuple[FeatureGroup, ...] = ()
    ctcs: Tuple[CrossTreeConstraint, ...] = ()
    aliases: Tuple[Tuple[str, int], ...] = field(default=())

    def __post_init__(self):
        self._check_tree()
        self._check_groups()
        count = len(self.features)
        for ctc in self.ctcs:
            if not (0 <= ctc.source < count and 0 <= ctc.target < count):
                raise ModelValidationError(
                    f"Cross-tree constraint {ctc} references an unknown feature"
                )
        names = set(self.feature_list.names)
        for alias, index in self.aliases:
            if alias in names:
                raise ModelValidationError(
                    f"Alias '{alias}' clashes with a feature name"
                )
            if not 0 <= index < count:
                raise ModelValidationError(f"Alias '{alias}' targets unknown feature")

    def _check_tree(self) -> None:
        if not self.features:
            raise ModelValidationError("A feature model needs a root feature")
        root = self.features[0]
        if root.relation is not Relation.ROOT or root.parent is not None:
            raise ModelValidationError("Feature 0 must be the root")
        count = len(self.features)
        for index, feature in enumerate(self.features[1:], start=1):
            if feature.relation is Relation.ROOT:
                raise ModelValidationError(
                    f"Feature '{feature.name}' is a second root"
                )
            if feature.parent is None or not 0 <= feature.parent < count:
                raise ModelValidationError(
                    f"Feature '{feature.name}' has no valid parent"
                )
            # Walking up from any feature must reach the root within count steps.
            current, steps = index, 0
            while current != 0:
                current = self.features[current].parent
                steps += 1
                if steps > count:
                    raise ModelValidationError(
                        f"Parent edges of '{feature.name}' form a cycle"
                    )

    def _check_groups(self) -> None:
        for group_index, group in enumerate(self.groups):
            if len(group.members) < 2:
                raise ModelValidationError(
                    f"Group under '{self.features[group.parent].name}' has fewer "
                    f"than 2 members"
                )
            expected = Relation.XOR if group.kind is GroupKind.XOR else Relation.OR
            for member in group.members:
                feature = self.features[member]
                if (
                    feature.parent != group.parent
                    or feature.group != group_index
                    or feature.relation is not expected
                ):
                    raise ModelValidationError(
                        f"Feature '{feature.name}' is inconsistent with its group"
                    )
        for index, feature in enumerate(self.features):
            if feature.relation in (Relation.XOR, Relation.OR):
                if feature.group is None or index not in self.groups[
                    feature.group
                ].members:
                    raise ModelValidationError(
                        f"Grouped feature '{feature.name}' is not listed in its group"
                    )
            elif feature.group is not None:
                raise ModelValidationError(
                    f"Feature '{feature.name}' is {feature.relation.value} and "
                    f"cannot belong to a group"
                )

    @cached_property
    def feature_list(self) -> FeatureList:
        return FeatureList(tuple(feature.name for feature in self.features))

    @cached_property
    def _lookup(self) -> Dict[str, int]:
        lookup = {name: index for index, name in enumerate(self.feature_list)}
        lookup.update(dict(self.aliases))
        return lookup

    def __len__(self) -> int:
        return len(self.features)

    @property
    def root(self) -> int:
        return 0

    def index_of(self, name: str) -> int:
        """Index of a feature by name or alias."""
        try:
            return self._lookup[name]
        except KeyError:
            raise KeyError(f"Unknown feature '{name}' in model '{self.name}'")

    def names_of(self, indices: Iterable[int]) -> List[str]:
        return [self.features[i].name for i in sorted(indices)]

    def children(self, index: int) -> List[int]:
        return [i for i, f in enumerate(self.features) if f.parent == index]

    def is_ancestor(self, ancestor: int, index: int) -> bool:
        current = self.features[index].parent
        while current is not None:
            if current == ancestor:
                return True
            current = self.features[current].parent
        return False


@dataclass(frozen=True)
class FeatureClassification:
    core: FrozenSet[int]
    variant: FrozenSet[int]
    dead: FrozenSet[int]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_ARITY = {
    "model": 1,
    "root": 1,
    "mandatory": 2,
    "optional": 2,
    "requires": 2,
    "excludes": 2,
    "alias": 2,
}


def _tokenize(line: str) -> List[Tuple[str, int]]:
    """Split a line into (token, 1-based column) pairs, dropping comments."""
    code = line.split("#", 1)[0]
    tokens = []
    column = 0
    for token in code.split():
        column = code.index(token, column)
        tokens.append((token, column + 1))
        column += len(token)
    return tokens


class _ModelBuilder:
    """Accumulates parsed statements and checks them as they arrive."""

    def __init__(self, source: Optional[str]):
        self.source = source
        self.name: Optional[str] = None
        self.names: List[str] = []
        self.index: Dict[str, int] = {}
        self.parents: List[Optional[int]] = []
        self.relations: List[Relation] = []
        self.member_of: List[Optional[int]] = []
        # (kind, parent name, parent column, line, members)
        self.groups: List[Tuple[GroupKind, str, int, int, List[int]]] = []
        self.ctcs: List[CrossTreeConstraint] = []
        self.aliases: Dict[str, int] = {}

    def error(self, message: str, line: int, column: Optional[int] = None):
        return ModelParseError(message, line, column, self.source)

    def resolve(self, token: Tuple[str, int], line: int, role: str) -> int:
        name, column = token
        if name in self.index:
            return self.index[name]
        if name in self.aliases:
            return self.aliases[name]
        raise self.error(f"unknown {role} '{name}'", line, column)

    def declare(
        self,
        token: Tuple[str, int],
        line: int,
        parent: Optional[int],
        relation: Relation,
        group: Optional[int] = None,
    ) -> int:
        name, column = token
        if name in self.index or name in self.aliases:
            raise self.error(f"duplicate feature name '{name}'", line, column)
        self.index[name] = len(self.names)
        self.names.append(name)
        self.parents.append(parent)
        self.relations.append(relation)
        self.member_of.append(group)
        return self.index[name]

    def statement(self, tokens: List[Tuple[str, int]], line: int) -> None:
        keyword, column = tokens[0]
        args = tokens[1:]

        if keyword in ("xor", "or"):
            if not args:
                raise self.error(f"'{keyword}' needs a parent and members", line)
            if len(args) < 3:
                raise self.error(
                    f"{keyword} group under '{args[0][0]}' needs at least 2 members",
                    line,
                    args[0][1],
                )
        elif keyword in _ARITY:
            if len(args) != _ARITY[keyword]:
                raise self.error(
                    f"'{keyword}' takes {_ARITY[keyword]} argument(s), got {len(args)}",
                    line,
                    column,
                )
        else:
            raise self.error(f"unknown statement '{keyword}'", line, column)

        if keyword == "model":
            if self.name is not None or self.names:
                raise self.error("'model' must be the first statement", line, column)
            self.name = args[0][0]
            return
        if keyword == "root":
            if self.names:
                raise self.error("a model has exactly one root", line, column)
            self.declare(args[0], line, None, Relation.ROOT)
            return
        if not self.names:
            raise self.error(f"'{keyword}' before 'root'", line, column)

        if keyword in ("mandatory", "optional"):
            parent = self.resolve(args[1], line, "parent")
            relation = Relation.MANDATORY if keyword == "mandatory" else Relation.OPTIONAL
            self.declare(args[0], line, parent, relation)
        elif keyword in ("xor", "or"):
            kind = GroupKind.XOR if keyword == "xor" else GroupKind.OR
            relation = Relation.XOR if keyword == "xor" else Relation.OR
            group_index = len(self.groups)
            members = [
                self.declare(token, line, None, relation, group_index)
                for token in args[1:]
            ]
            self.groups.append((kind, args[0][0], args[0][1], line, members))
        elif keyword in ("requires", "excludes"):
            source = self.resolve(args[0], line, "feature")
            target = self.resolve(args[1], line, "feature")
            if source == target:
                raise self.error(
                    f"'{keyword}' relates '{args[0][0]}' to itself", line, args[1][1]
                )
            kind = (
                ConstraintKind.REQUIRES
                if keyword == "requires"
                else ConstraintKind.EXCLUDES
            )
            self.ctcs.append(CrossTreeConstraint(kind, source, target))
        elif keyword == "alias":
            alias, alias_column = args[0]
            if alias in self.index or alias in self.aliases:
                raise self.error(f"duplicate feature name '{alias}'", line, alias_column)
            self.aliases[alias] = self.resolve(args[1], line, "feature")

    def build(self, last_line: int) -> FeatureModel:
        if not self.names:
            raise self.error("model declares no root feature", max(last_line, 1))

        groups = []
        for kind, parent_name, column, line, members in self.groups:
            parent = self.resolve((parent_name, column), line, "parent")
            if parent in members:
                raise self.error(
                    f"group parent '{parent_name}' is one of its own members",
                    line,
                    column,
                )
            for member in members:
                self.parents[member] = parent
            groups.append(FeatureGroup(parent, kind, tuple(members)))

        for kind, parent_name, column, line, members in self.groups:
            for member in members:
                current, steps = member, 0
                while current != 0:
                    current = self.parents[current]
                    steps += 1
                    if steps > len(self.names):
                        raise self.error(
                            f"group under '{parent_name}' creates a parent cycle",
                            line,
                            column,
                        )

        features = tuple(
            Feature(name, parent, relation, group)
            for name, parent, relation, group in zip(
                self.names, self.parents, self.relations, self.member_of
            )
        )
        try:
            return FeatureModel(
                name=self.name or self.names[0],
                features=features,
                groups=tuple(groups),
                ctcs=tuple(self.ctcs),
                aliases=tuple(self.aliases.items()),
            )
        except ModelValidationError as e:
            raise ModelParseError(str(e), source=self.source) from e


def parse_model(text: str, source: Optional[str] = None) -> FeatureModel:
    """
    Parse ``.fm`` text into a FeatureModel.

    Args:
        text: Model file contents
        source: Name used in error messages (usually the file path)

    Returns:
        FeatureModel whose feature order is the declaration order

    Raises:
        ModelParseError: On syntax errors, duplicate names, unknown parents
            or features, and groups with fewer than two members
    """
    builder = _ModelBuilder(source)
    line_number = 0
    for line_number, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line)
        if tokens:
            builder.statement(tokens, line_number)
    model = builder.build(line_number)
    logger.debug(
        f"Parsed model '{model.name}' with {len(model)} features, "
        f"{len(model.groups)} groups and {len(model.ctcs)} constraints"
    )
    return model


def load_model(path: Union[str, Path]) -> FeatureModel:
    """Read and parse a ``.fm`` file."""
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ModelParseError(f"cannot read model file: {e}", source=str(file_path))
    return parse_model(text, source=str(file_path))


def serialize_model(model: FeatureModel) -> str:
    """Render a model as ``.fm`` text that parses back to the same structure."""
    names = model.feature_list
    lines = [f"model {model.name}", f"root {names[0]}"]
    emitted_groups: Set[int] = set()
    for feature in model.features[1:]:
        if feature.relation in (Relation.MANDATORY, Relation.OPTIONAL):
            lines.append(
                f"{feature.relation.value} {feature.name} {names[feature.parent]}"
            )
        elif feature.group not in emitted_groups:
            emitted_groups.add(feature.group)
            group = model.groups[feature.group]
            members = " ".join(names[m] for m in group.members)
            lines.append(f"{group.kind.value} {names[group.parent]} {members}")
    for alias, index in model.aliases:
        lines.append(f"alias {alias} {names[index]}")
    for ctc in model.ctcs:
        lines.append(f"{ctc.kind.value} {names[ctc.source]} {names[ctc.target]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validity
# ---------------------------------------------------------------------------


def check_dimensions(model: FeatureModel, fs: FeatureSet) -> None:
    count = len(model)
    if fs.size != count or any(not 0 <= i < count for i in fs.sel | fs.notsel):
        raise DimensionMismatchError(
            f"Feature set assigns {fs.size} features but model '{model.name}' "
            f"has {count}"
        )


def is_valid_assignment(model: FeatureModel, values: Sequence[bool]) -> bool:
    """Structural validity check over selection flags in canonical order."""
    if not values[0]:
        return False
    for index, feature in enumerate(model.features[1:], start=1):
        parent_on = values[feature.parent]
        if values[index] and not parent_on:
            return False
        if feature.relation is Relation.MANDATORY and parent_on and not values[index]:
            return False
    for group in model.groups:
        if not values[group.parent]:
            continue
        chosen = sum(1 for m in group.members if values[m])
        if group.kind is GroupKind.XOR and chosen != 1:
            return False
        if group.kind is GroupKind.OR and chosen < 1:
            return False
    for ctc in model.ctcs:
        if ctc.kind is ConstraintKind.REQUIRES:
            if values[ctc.source] and not values[ctc.target]:
                return False
        elif values[ctc.source] and values[ctc.target]:
            return False
    return True


def validate_feature_set(model: FeatureModel, fs: FeatureSet) -> bool:
    """
    Decide whether a feature set is a valid product of the model.

    Raises:
        DimensionMismatchError: If fs does not assign exactly the model's features
    """
    check_dimensions(model, fs)
    return is_valid_assignment(model, fs.values())


def classify_features(
    model: FeatureModel, all_products: Iterable[FeatureSet]
) -> FeatureClassification:
    """
    Split features into core, variant and dead given every valid product.

    Raises:
        VoidModelError: If the product set is empty
    """
    products = list(all_products)
    if not products:
        raise VoidModelError(f"Model '{model.name}' has no valid products")
    everywhere = set(range(len(model)))
    somewhere: Set[int] = set()
    for fs in products:
        everywhere &= fs.sel
        somewhere |= fs.sel
    dead = frozenset(range(len(model))) - somewhere
    if dead:
        logger.warning(
            f"Model '{model.name}' has dead features: {model.names_of(dead)}"
        )
    return FeatureClassification(
        core=frozenset(everywhere),
        variant=frozenset(somewhere - everywhere),
        dead=dead,
    )


def feature_set_from_names(model: FeatureModel, selected: Iterable[str]) -> FeatureSet:
    """Build a FeatureSet from selected feature names (aliases accepted)."""
    indices = {model.index_of(name) for name in selected}
    return FeatureSet.from_selected(indices, len(model))
