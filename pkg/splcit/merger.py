"""
Configuration merging and structured generator parameters.
"""

import logging
import os
from typing import Any, Dict, Mapping, Type, TypeVar

from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from .exceptions import ConfigFormatError, GeneratorConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def register_resolvers() -> None:
    """Register the ``${env:VAR_NAME}`` resolver once per process."""
    if not OmegaConf.has_resolver("env"):
        OmegaConf.register_new_resolver("env", lambda name: os.environ.get(name))
        logger.debug("Registered 'env' resolver for ${env:VAR_NAME} syntax")


class ConfigMerger:
    """
    Deep-merges configuration sources; later sources win.

    Uses OmegaConf for merging and ``${...}`` interpolation.
    """

    def __init__(self):
        register_resolvers()

    def merge_configs(
        self, *config_sources: Mapping[str, Any], enable_interpolation: bool = True
    ) -> Dict[str, Any]:
        """
        Merge configuration sources with precedence.

        Args:
            *config_sources: Configuration dictionaries, lowest precedence first
            enable_interpolation: Whether to resolve interpolations

        Returns:
            Merged configuration dictionary
        """
        valid_configs = [dict(config) for config in config_sources if config]
        if not valid_configs:
            return {}

        try:
            omega_configs = [OmegaConf.create(config) for config in valid_configs]
            merged = OmegaConf.merge(*omega_configs)
        except OmegaConfBaseException as e:
            raise ConfigFormatError(f"Cannot merge configuration: {e}") from e

        logger.debug(f"Merged {len(valid_configs)} configuration sources")
        return self._to_dict(merged, enable_interpolation)  # type: ignore[arg-type]

    def _to_dict(self, omega_config: DictConfig, enable_interpolation: bool) -> Dict[str, Any]:
        if enable_interpolation:
            try:
                return OmegaConf.to_container(omega_config, resolve=True)  # type: ignore[return-value]
            except OmegaConfBaseException as e:
                logger.warning(f"Variable interpolation failed: {e}")
        return OmegaConf.to_container(omega_config, resolve=False)  # type: ignore[return-value]


def build_structured(schema: Type[T], overrides: Mapping[str, Any]) -> T:
    """
    Instantiate a dataclass schema from nested overrides.

    Unknown keys and values of the wrong type are rejected by OmegaConf;
    range checks are the dataclass's own.

    Raises:
        ConfigFormatError: If overrides do not fit the schema
        GeneratorConfigError: If a value is out of range
    """
    register_resolvers()
    try:
        merged = OmegaConf.merge(OmegaConf.structured(schema), dict(overrides))
        return OmegaConf.to_object(merged)  # type: ignore[return-value]
    except GeneratorConfigError:
        raise
    except OmegaConfBaseException as e:
        raise ConfigFormatError(
            f"Invalid {schema.__name__} settings: {e}"
        ) from e
