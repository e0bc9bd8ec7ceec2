import os
from functools import lru_cache

import toml

from src.config.constants import LOG_DIR, SETTINGS_FILE


@lru_cache(maxsize=4)
def _load_settings_file(path):
    """Parses the optional toml settings file; missing or broken files yield {}."""
    if not os.path.exists(path):
        return {}
    try:
        return toml.load(path)
    except (toml.TomlDecodeError, OSError):
        return {}


def get_setting(key, default=None):
    """Reads a setting from bwk.toml first, then env var."""
    path = os.getenv("BWK_SETTINGS_FILE", SETTINGS_FILE)
    file_settings = _load_settings_file(path)
    if key in file_settings:
        return file_settings[key]
    return os.getenv(key, default)


def get_int_setting(key, default, minimum=None):
    raw = get_setting(key, default)
    try:
        value = int(raw)
    except (TypeError, ValueError):
        value = int(default)
    if minimum is not None:
        value = max(minimum, value)
    return value


def get_thread_count():
    """Parallel replication cap (BWK_THREADS)."""
    return get_int_setting("BWK_THREADS", 1, minimum=1)


def get_log_dir():
    return str(get_setting("BWK_LOG_DIR", LOG_DIR))
