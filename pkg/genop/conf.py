# genop/conf.py
from typing import Any, Dict

from django.conf import settings

# --- Defaults, overridden by the GENOP dict in the project settings ---
DEFAULTS: Dict[str, Any] = {
    "SUBGROUP_BOUND": 64,
    "ENUMERATION_BOUND": 100000,
    "ARITY_BOUND": 4,
    "MAX_GV": 3,
    "DEPTH": 2,
    "THREADS": 1,
}


def get_setting(name: str) -> Any:
    """
    Looks up a genop tunable, read afresh on each call so that
    ``override_settings(GENOP=...)`` takes effect in tests.

    Args:
        name: Key of the tunable, e.g. "SUBGROUP_BOUND".

    Returns:
        The configured value, or the library default.
    """
    if name not in DEFAULTS:
        raise KeyError(f"Unknown genop setting: {name}")
    configured = getattr(settings, "GENOP", {}) or {}
    return configured.get(name, DEFAULTS[name])
