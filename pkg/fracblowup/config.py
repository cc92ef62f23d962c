"""
Runtime settings for fracblowup.

Environment variables (optionally from a .env file) provide process-wide
defaults; per-run parameters come from flags or a TOML run file.
"""
import os
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from fracblowup.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)


class Settings:
    """Singleton holding process-wide settings."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Settings, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self.reload()
        self._initialized = True

    def reload(self) -> None:
        """Re-read the environment (tests patch variables and call this)."""
        try:
            self.threads = max(1, int(os.getenv("FRACBLOWUP_THREADS", "1")))
            self.output_dir = os.getenv("FRACBLOWUP_OUTPUT_DIR", "results")
            self.log_level = os.getenv("FRACBLOWUP_LOG_LEVEL", "INFO").upper()
            self.tail_cutoff = float(os.getenv("FRACBLOWUP_TAIL_CUTOFF", "1e8"))
        except ValueError as e:
            raise ConfigError(f"Invalid FRACBLOWUP_* environment value: {str(e)}")
        if self.tail_cutoff <= 10.0:
            raise ConfigError("FRACBLOWUP_TAIL_CUTOFF must exceed 10", value=self.tail_cutoff)


def load_run_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Load a TOML run file.

    Nested tables are flattened with their section name dropped, so both
    ``p = 2.5`` and ``[model]\\np = 2.5`` give ``{"p": 2.5}``.

    Args:
        path: Path of the TOML file, or None

    Returns:
        Flat dict of parameters (empty when path is None)

    Raises:
        ConfigError: If the file is missing or malformed
    """
    if path is None:
        return {}
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"Run file not found: {path}")
    try:
        with file_path.open("rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed run file {path}: {str(e)}")

    flat: Dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    logger.info(f"Loaded run file {path} with keys {sorted(flat)}")
    return flat


def merge_params(file_params: Dict[str, Any], flag_params: Dict[str, Any]) -> Dict[str, Any]:
    """Flags win over file values; flags left at None do not override."""
    merged = dict(file_params)
    for key, value in flag_params.items():
        if value is not None:
            merged[key] = value
    return merged


settings = Settings()
