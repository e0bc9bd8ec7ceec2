import datetime
import json
import logging
import os
import tempfile
import threading
import traceback

from src.config.constants import ERROR_LOG_NAME, LOG_HISTORY, SYSTEM_LOG_NAME
from src.config.settings import get_log_dir

_LOCK = threading.Lock()


def _log_path(name):
    return os.path.join(get_log_dir(), name)


def _read_entries(path):
    if not os.path.exists(path):
        return []
    try:
        with open(path, "r", encoding="utf-8") as f:
            entries = json.load(f)
        return entries if isinstance(entries, list) else []
    except json.JSONDecodeError as e:
        logging.getLogger(__name__).warning(f"Log JSON decode error: {e}, resetting log file.")
        return []
    except OSError as e:
        logging.getLogger(__name__).warning(f"Error reading log file: {e}")
        return []


def _append_entry(name, entry):
    path = _log_path(name)
    temp_path = None
    with _LOCK:
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            entries = _read_entries(path)
            entries.append(entry)
            entries = entries[-LOG_HISTORY:]
            fd, temp_path = tempfile.mkstemp(dir=os.path.dirname(path))
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(entries, f, indent=4, default=str)
            os.replace(temp_path, path)
        except Exception as e:
            logging.getLogger(__name__).error(f"Failed to atomic write logs: {e}")
            if temp_path is not None:
                try:
                    os.unlink(temp_path)
                except OSError:
                    pass


def _now():
    return datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")


def log_error(error_msg, context="General", details=None):
    """Logs an error with its traceback to the JSON error log."""
    _append_entry(
        ERROR_LOG_NAME,
        {
            "timestamp": _now(),
            "context": context,
            "error": str(error_msg),
            "traceback": traceback.format_exc(),
            "details": details or {},
        },
    )


def log_system_event(event_type, details):
    """Logs a system event (warnings, retries, sweep progress) to the JSON event log."""
    _append_entry(SYSTEM_LOG_NAME, {"timestamp": _now(), "type": event_type, "details": details})


def get_logs():
    """Returns the list of logged errors."""
    return _read_entries(_log_path(ERROR_LOG_NAME))


def get_system_events(event_type=None):
    events = _read_entries(_log_path(SYSTEM_LOG_NAME))
    if event_type is None:
        return events
    return [e for e in events if e.get("type") == event_type]
