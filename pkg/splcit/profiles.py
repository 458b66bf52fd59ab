"""
Benchmark profile resolution with inheritance support.
"""

import logging
from typing import Any, Dict, List, Optional

from .exceptions import CircularInheritanceError, ProfileNotFoundError
from .merger import ConfigMerger

logger = logging.getLogger(__name__)

RESERVED_KEYS = ("profiles", "defaults", "default_profile")


class ProfileResolver:
    """
    Resolves benchmark profiles.

    A configuration holds a ``defaults`` table and optional ``profiles``
    tables; a profile may name a parent via ``inherits``. The resolved
    profile is deep-merged over the defaults.
    """

    def __init__(self, inherit_key: str = "inherits"):
        self.inherit_key = inherit_key
        self.merger = ConfigMerger()

    def resolve_profile(
        self, config_data: Dict[str, Any], profile_name: Optional[str] = None
    ) -> Dict[str, Any]:
        """
        Resolve a profile against the defaults.

        Args:
            config_data: Full configuration data
            profile_name: Profile to resolve; falls back to ``default_profile``
                and then to the defaults alone

        Returns:
            Resolved configuration dictionary (not yet interpolated)

        Raises:
            ProfileNotFoundError: If the requested profile does not exist
            CircularInheritanceError: If profiles inherit from each other in a cycle
        """
        profiles = config_data.get("profiles") or {}
        defaults = dict(config_data.get("defaults") or {})
        for key, value in config_data.items():
            if key not in RESERVED_KEYS:
                defaults.setdefault(key, value)

        if profile_name is None:
            profile_name = self.get_default_profile(config_data)
        if profile_name is None:
            return defaults

        if profile_name not in profiles:
            if profile_name == "default":
                logger.debug("Profile 'default' not found, using defaults only")
                return defaults
            raise ProfileNotFoundError(
                f"Profile '{profile_name}' not found. "
                f"Available profiles: {sorted(profiles)}"
            )

        resolved = self._resolve_inheritance_chain(profiles, profile_name, [])
        final_config = self.merger.merge_configs(
            defaults, resolved, enable_interpolation=False
        )
        logger.debug(f"Resolved profile '{profile_name}' with {len(final_config)} keys")
        return final_config

    def _resolve_inheritance_chain(
        self, profiles: Dict[str, Any], profile_name: str, visited: List[str]
    ) -> Dict[str, Any]:
        if profile_name in visited:
            cycle_path = " -> ".join(visited + [profile_name])
            raise CircularInheritanceError(f"Circular inheritance detected: {cycle_path}")
        if profile_name not in profiles:
            raise ProfileNotFoundError(
                f"Profile '{profile_name}' not found in inheritance chain"
            )

        profile_config = dict(profiles[profile_name] or {})
        parent_profile = profile_config.pop(self.inherit_key, None)
        if not parent_profile:
            return profile_config
        parent_config = self._resolve_inheritance_chain(
            profiles, parent_profile, visited + [profile_name]
        )
        return self.merger.merge_configs(
            parent_config, profile_config, enable_interpolation=False
        )

    def list_profiles(self, config_data: Dict[str, Any]) -> List[str]:
        return sorted((config_data.get("profiles") or {}).keys())

    def get_default_profile(self, config_data: Dict[str, Any]) -> Optional[str]:
        return config_data.get("default_profile")
