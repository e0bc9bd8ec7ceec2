"""Atomic output writers and JSON readers."""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any

import pandas as pd


def _atomic_write(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_path, path)
    except Exception:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise
    return path


def atomic_write_json(path: str, payload: Any) -> str:
    """Writes JSON with sorted keys so identical payloads give identical bytes."""
    return _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def atomic_write_csv(path: str, df: pd.DataFrame) -> str:
    return _atomic_write(path, df.to_csv(index=False, lineterminator="\n"))


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
