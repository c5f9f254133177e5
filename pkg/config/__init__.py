# config/__init__.py

import os
from dataclasses import dataclass

from src.core.errors import ConfigError

DEFAULT_MAX_ITERS = 200
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_WORKERS = 1

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    max_iters: int = DEFAULT_MAX_ITERS
    log_level: str = DEFAULT_LOG_LEVEL
    workers: int = DEFAULT_WORKERS


def _positive_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {raw!r}")
    return value


def load_settings() -> Settings:
    """
    Read the settings from the environment. The entry point calls
    load_dotenv() first, so values from a .env file are visible here.
    """
    log_level = (os.getenv("ALPHAPORT_LOG_LEVEL") or DEFAULT_LOG_LEVEL).strip().upper()
    if log_level not in _LOG_LEVELS:
        raise ConfigError(f"ALPHAPORT_LOG_LEVEL must be one of {_LOG_LEVELS}, got {log_level!r}")
    return Settings(
        max_iters=_positive_int("ALPHAPORT_MAX_ITERS", DEFAULT_MAX_ITERS),
        log_level=log_level,
        workers=_positive_int("ALPHAPORT_WORKERS", DEFAULT_WORKERS),
    )


def max_iters() -> int:
    """Newton iteration cap; read on every call so tests can monkeypatch the env."""
    return _positive_int("ALPHAPORT_MAX_ITERS", DEFAULT_MAX_ITERS)
