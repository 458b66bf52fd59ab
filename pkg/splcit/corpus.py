"""
Locating feature models: user-supplied files and directories plus the
models bundled with the package.
"""

import logging
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Set, Union

from .exceptions import ModelNotFoundError
from .feature_model import FeatureModel, parse_model

logger = logging.getLogger(__name__)

MODEL_SUFFIX = ".fm"
DATA_PACKAGE = "splcit.data"
GPL_RESOURCE = "gpl.fm"
BENCH_RESOURCE = "bench.toml"


def bundled_text(resource: str) -> str:
    """Contents of a file shipped in ``splcit/data``."""
    return resources.files(DATA_PACKAGE).joinpath(resource).read_text(encoding="utf-8")


def load_gpl() -> FeatureModel:
    """The bundled Graph Product Line model."""
    return parse_model(bundled_text(GPL_RESOURCE), source=f"<bundled {GPL_RESOURCE}>")


def bundled_bench_config() -> Path:
    """Path of the bundled benchmark configuration."""
    return Path(str(resources.files(DATA_PACKAGE).joinpath(BENCH_RESOURCE)))


class ModelDiscovery:
    """
    Expands model arguments into ``.fm`` files.

    Files are taken as given; directories contribute their ``*.fm`` files in
    sorted order (non-recursive). Paths resolving to the same file are kept
    once, in first-seen order.
    """

    def __init__(self, suffix: str = MODEL_SUFFIX):
        self.suffix = suffix

    def discover(self, locations: Iterable[Union[str, Path]]) -> List[Path]:
        """
        Raises:
            ModelNotFoundError: If a location does not exist or a directory holds no models
        """
        model_files: List[Path] = []
        for location in locations:
            path = Path(location).expanduser()
            if path.is_dir():
                found = self._search_directory(path)
                if not found:
                    raise ModelNotFoundError(
                        f"No {self.suffix} files found in directory: {path}"
                    )
                model_files.extend(found)
            elif path.is_file():
                model_files.append(path)
            else:
                raise ModelNotFoundError(f"Model file not found: {path}")
        return self._remove_duplicates(model_files)

    def _search_directory(self, directory: Path) -> List[Path]:
        return sorted(
            p for p in directory.iterdir() if p.is_file() and p.suffix == self.suffix
        )

    def _remove_duplicates(self, model_files: List[Path]) -> List[Path]:
        seen: Set[Path] = set()
        unique_files = []
        for model_file in model_files:
            resolved = model_file.resolve()
            if resolved not in seen:
                seen.add(resolved)
                unique_files.append(model_file)
            else:
                logger.debug(f"Skipping duplicate model file {model_file}")
        return unique_files
