import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv


def _truthy(v: str | None) -> bool:
    return (v or "").lower() in {"1", "true", "t", "yes", "y"}


# .env is only read outside production, and never when
# PYTHON_DOTENV_DISABLED=1 is set.
APP_ENV = os.getenv("APP_ENV")
if (APP_ENV is None or APP_ENV.lower() != "production") and not _truthy(
    os.getenv("PYTHON_DOTENV_DISABLED")
):
    # override=False: values already in the environment win
    load_dotenv(override=False)


DEFAULT_ALTERNATE_BOX_HOST = "mobile-api.box.com"


def get_app_env() -> str:
    return os.getenv("APP_ENV", "development")


def get_registry_path() -> Optional[str]:
    path = os.getenv("CLOUDSIFT_REGISTRY")
    return path or None


def get_log_level() -> int:
    raw = os.getenv("CLOUDSIFT_LOG_LEVEL", "INFO").strip().upper()
    level = logging.getLevelName(raw)
    return level if isinstance(level, int) else logging.INFO


def get_case_fallback() -> bool:
    raw = os.getenv("CLOUDSIFT_CASE_FALLBACK")
    if raw is None:
        return True
    return _truthy(raw)


def get_carve_max_bytes() -> Optional[int]:
    raw = os.getenv("CLOUDSIFT_CARVE_MAX_MB")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(
            "CLOUDSIFT_CARVE_MAX_MB is not an integer: %r", raw
        )
        return None
    return value * 1024 * 1024 if value > 0 else None


def get_box_alternate_host() -> str:
    return os.getenv("CLOUDSIFT_BOX_ALT_HOST", DEFAULT_ALTERNATE_BOX_HOST)


@dataclass(frozen=True)
class Settings:
    registry_path: Optional[str]
    log_level: int
    case_fallback: bool
    carve_max_bytes: Optional[int]
    box_alternate_host: str


def get_settings(registry_path: Optional[str] = None) -> Settings:
    return Settings(
        registry_path=registry_path or get_registry_path(),
        log_level=get_log_level(),
        case_fallback=get_case_fallback(),
        carve_max_bytes=get_carve_max_bytes(),
        box_alternate_host=get_box_alternate_host(),
    )
