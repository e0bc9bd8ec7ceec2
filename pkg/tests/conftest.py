import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    """Keeps JSON logs of every test inside its own tmp directory."""
    log_dir = tmp_path / "logs"
    monkeypatch.setenv("BWK_LOG_DIR", str(log_dir))
    monkeypatch.setenv("BWK_SETTINGS_FILE", str(tmp_path / "missing.toml"))
    return log_dir
