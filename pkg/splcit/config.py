"""
Benchmark configuration: file loading, profile resolution and validation.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

try:
    import yaml

    HAS_YAML = True
except ImportError:
    HAS_YAML = False

try:
    import tomllib  # Python 3.11+

    HAS_TOML = True
except ImportError:
    try:
        import tomli as tomllib  # type: ignore[no-redef]

        HAS_TOML = True
    except ImportError:
        HAS_TOML = False

from .exceptions import ConfigFormatError, ConfigNotFoundError, ModelValidationError
from .generators import ALGORITHMS, GeneratorConfig
from .generators.common import MAX_SEED
from .merger import ConfigMerger
from .profiles import ProfileResolver
from .sat_core import DEFAULT_ENUMERATION_CAP
from .synthetic import SyntheticSpec

logger = logging.getLogger(__name__)

DEFAULT_ALGORITHMS = ("annealing", "genetic", "greedy")


class ConfigLoader:
    """
    Loads configuration files in multiple formats.

    Supports YAML, JSON, and TOML formats with automatic format detection
    based on file extension.
    """

    def load_config_file(self, file_path: Path) -> Dict[str, Any]:
        """
        Load configuration from file.

        Raises:
            ConfigNotFoundError: If file does not exist
            ConfigFormatError: If file format is unsupported or invalid
        """
        if not file_path.is_file():
            raise ConfigNotFoundError(f"Configuration file not found: {file_path}")

        extension = file_path.suffix.lower()
        try:
            content = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigFormatError(f"Error reading file {file_path}: {e}") from e

        if extension in [".yaml", ".yml"]:
            return self._load_yaml(content, file_path)
        elif extension == ".json":
            return self._load_json(content, file_path)
        elif extension == ".toml":
            return self._load_toml(content, file_path)
        raise ConfigFormatError(
            f"Unsupported file format: {extension}. "
            f"Supported formats: .yaml, .yml, .json, .toml"
        )

    def _load_yaml(self, content: str, file_path: Path) -> Dict[str, Any]:
        if not HAS_YAML:
            raise ConfigFormatError(
                "YAML support not available. Install PyYAML: pip install pyyaml"
            )
        try:
            data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise ConfigFormatError(f"Invalid YAML in {file_path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigFormatError(
                f"YAML file must contain a dictionary, got {type(data).__name__}: {file_path}"
            )
        return data

    def _load_json(self, content: str, file_path: Path) -> Dict[str, Any]:
        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise ConfigFormatError(f"Invalid JSON in {file_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigFormatError(
                f"JSON file must contain an object, got {type(data).__name__}: {file_path}"
            )
        return data

    def _load_toml(self, content: str, file_path: Path) -> Dict[str, Any]:
        if not HAS_TOML:
            raise ConfigFormatError(
                "TOML support not available. Install tomli: pip install tomli"
            )
        try:
            return tomllib.loads(content)
        except Exception as e:  # tomllib raises various exceptions
            raise ConfigFormatError(f"Invalid TOML in {file_path}: {e}") from e


@dataclass
class BenchmarkConfig:
    """
    One benchmark: which models, which algorithms, how many seeded runs.

    Run ``i`` of every cell uses seed ``base_seed + i``.
    """

    models: List[Path] = field(default_factory=list)
    synthetic: List[SyntheticSpec] = field(default_factory=list)
    include_gpl: bool = True
    algorithms: Tuple[str, ...] = DEFAULT_ALGORITHMS
    t: int = 2
    runs: int = 30
    base_seed: int = 0
    workers: int = 1
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    archive: bool = False
    generators: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigFormatError(f"runs must be >= 1, got {self.runs}")
        if not self.algorithms:
            raise ConfigFormatError("algorithms must not be empty")
        unknown = sorted(set(self.algorithms) - set(ALGORITHMS))
        if unknown:
            raise ConfigFormatError(
                f"Unknown algorithm(s) {unknown}; expected a subset of {sorted(ALGORITHMS)}"
            )
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigFormatError(f"Duplicate algorithms in {list(self.algorithms)}")
        if self.t < 1:
            raise ConfigFormatError(f"t must be >= 1, got {self.t}")
        if self.workers < 1:
            raise ConfigFormatError(f"workers must be >= 1, got {self.workers}")
        if self.enumeration_cap < 1:
            raise ConfigFormatError("enumeration_cap must be >= 1")
        if not 0 <= self.base_seed <= MAX_SEED - (self.runs - 1):
            raise ConfigFormatError(
                f"base_seed must leave room for {self.runs} 64-bit run seeds"
            )

    def seeds(self) -> List[int]:
        return [self.base_seed + run for run in range(self.runs)]

    def generator_config(self, seed: int) -> GeneratorConfig:
        return self.generators.with_seed(seed)

    @classmethod
    def from_dict(
        cls, data: Mapping[str, Any], base_dir: Optional[Path] = None
    ) -> "BenchmarkConfig":
        """
        Build a config from a resolved dictionary.

        Relative model paths are taken relative to base_dir.

        Raises:
            ConfigFormatError: On unknown keys or malformed values
        """
        data = dict(data)
        known = {
            "models",
            "synthetic",
            "include_gpl",
            "algorithms",
            "t",
            "runs",
            "base_seed",
            "workers",
            "enumeration_cap",
            "archive",
            "generators",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigFormatError(f"Unknown benchmark setting(s): {unknown}")

        base_dir = base_dir or Path.cwd()
        models = []
        for entry in _as_list(data.pop("models", []), "models"):
            path = Path(str(entry)).expanduser()
            models.append(path if path.is_absolute() else base_dir / path)

        synthetic = []
        for entry in _as_list(data.pop("synthetic", []), "synthetic"):
            if not isinstance(entry, Mapping):
                raise ConfigFormatError(f"Synthetic model entries must be tables, got {entry!r}")
            try:
                synthetic.append(SyntheticSpec(**entry))
            except (TypeError, ModelValidationError) as e:
                raise ConfigFormatError(f"Invalid synthetic model {dict(entry)}: {e}") from e

        generators = GeneratorConfig.from_mapping(data.pop("generators", None) or {})
        if "algorithms" in data:
            data["algorithms"] = tuple(
                str(a) for a in _as_list(data["algorithms"], "algorithms")
            )
        for key in ("t", "runs", "base_seed", "workers", "enumeration_cap"):
            if key in data and (isinstance(data[key], bool) or not isinstance(data[key], int)):
                raise ConfigFormatError(f"{key} must be an integer, got {data[key]!r}")
        for key in ("include_gpl", "archive"):
            if key in data and not isinstance(data[key], bool):
                raise ConfigFormatError(f"{key} must be true or false, got {data[key]!r}")
        return cls(models=models, synthetic=synthetic, generators=generators, **data)


def _as_list(value: Any, key: str) -> List[Any]:
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    raise ConfigFormatError(f"{key} must be a list, got {type(value).__name__}")


class BenchmarkConfigResolver:
    """
    Loads a benchmark configuration file and resolves one profile.

    Resolution order: load the file, resolve the profile over ``defaults``,
    merge overrides (highest precedence), then interpolate ``${...}``.
    """

    def __init__(
        self,
        path: Union[str, Path],
        profile: Optional[str] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ):
        self.path = Path(path)
        self.profile = profile
        self.overrides = dict(overrides or {})
        self.loader = ConfigLoader()
        self.profile_resolver = ProfileResolver()
        self.merger = ConfigMerger()

    def resolve_dict(self) -> Dict[str, Any]:
        data = self.loader.load_config_file(self.path)
        profile_config = self.profile_resolver.resolve_profile(data, self.profile)
        final_config = self.merger.merge_configs(profile_config, self.overrides)
        profile = self.profile or self.profile_resolver.get_default_profile(data) or "defaults"
        logger.info(f"Resolved benchmark configuration from {self.path} (profile '{profile}')")
        return final_config

    def resolve(self) -> BenchmarkConfig:
        return BenchmarkConfig.from_dict(self.resolve_dict(), base_dir=self.path.parent)

    def list_profiles(self) -> List[str]:
        return self.profile_resolver.list_profiles(self.loader.load_config_file(self.path))


def load_benchmark_config(
    path: Union[str, Path],
    profile: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> BenchmarkConfig:
    """Load, resolve and validate a benchmark configuration file."""
    return BenchmarkConfigResolver(path, profile, overrides).resolve()
