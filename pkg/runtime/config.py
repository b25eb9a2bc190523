import os
import logging
import uuid
from contextvars import ContextVar
from typing import Any, Dict, Optional

import toml
from dotenv import load_dotenv

from runtime.errors import ConfigurationError


run_id_var: ContextVar[str] = ContextVar('run_id', default='no-run')


class RunContextFilter(logging.Filter):
    """Filter to inject the run ID into log records"""
    def filter(self, record) -> bool:
        record.run_id = run_id_var.get()
        return True


load_dotenv()

LOG_LEVEL = os.getenv("NVFORGE_LOG_LEVEL", "INFO").upper()

logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s - [%(run_id)s] - %(levelname)s - %(name)s - %(message)s"
)

for handler in logging.root.handlers:
    handler.addFilter(RunContextFilter())

logger = logging.getLogger("NvForge")


def set_run_id(run_id: str = None) -> str:
    """Set run ID for logging context"""
    if run_id is None:
        run_id = str(uuid.uuid4())[:8]
    run_id_var.set(run_id)
    logger.debug(f"Run ID set to: {run_id}")
    return run_id


TOOL_VERSION = "0.3.0"

THREADS_ENV = "NVFORGE_THREADS"
BACKEND = os.getenv("NVFORGE_BACKEND", "loky")


def resolve_threads(flag: Optional[int] = None) -> int:
    """Worker count from the --threads flag, then NVFORGE_THREADS; 0 means all cores."""
    value = flag
    if value is None:
        raw = os.getenv(THREADS_ENV, "0")
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 0:
        raise ConfigurationError(f"thread count must be >= 0, got {value}")
    if value == 0:
        value = os.cpu_count() or 1
    return value


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """Read a TOML run configuration; a missing path yields an empty config."""
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = toml.load(fh)
    except toml.TomlDecodeError as e:
        raise ConfigurationError(f"could not parse {path}: {e}")
    logger.info(f"Loaded config {os.path.basename(path)} (sections={sorted(data)})")
    return data


def merge_overrides(section: Dict[str, Any], **overrides: Any) -> Dict[str, Any]:
    """Flags win over file values; None means the flag was not given."""
    merged = dict(section)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged
