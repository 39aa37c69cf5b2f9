"""Configuration file loading (TOML) with environment overrides."""

from __future__ import annotations

import os
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_ENV = "DFBENCH_CONFIG"
STORE_ENV = "DFBENCH_STORE"
HOST_ENV = "DFBENCH_HOST"
PORT_ENV = "DFBENCH_PORT"

DEFAULTS = {
    "store": "dfbench.sqlite3",
    "host": "127.0.0.1",
    "port": 8000,
    "base_dir": None,
    "carving_threshold": 0.20,
    "registry_include_mtime": False,
    "sft03_strict": False,
    "max_upload_bytes": 64 * 1024 * 1024,
}


def load_toml(path: "str | Path") -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_settings(path: "str | Path | None" = None) -> dict:
    """Merge defaults, the config file, then environment variables.

    Relative ``store`` and ``base_dir`` values resolve against the config
    file's directory.
    """
    settings = dict(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        path = Path(path)
        data = load_toml(path)
        flat = {}
        for key, value in data.items():
            if isinstance(value, dict):
                flat.update(value)
            else:
                flat[key] = value
        for key in ("store", "base_dir"):
            if flat.get(key) and flat[key] != ":memory:" and not Path(flat[key]).is_absolute():
                flat[key] = str(path.parent / flat[key])
        settings.update(flat)
    if os.environ.get(STORE_ENV):
        settings["store"] = os.environ[STORE_ENV]
    if os.environ.get(HOST_ENV):
        settings["host"] = os.environ[HOST_ENV]
    if os.environ.get(PORT_ENV):
        settings["port"] = int(os.environ[PORT_ENV])
    return settings
