from __future__ import annotations

import re

from app.evidence import AppIdentity, DeviceState, Platform, Provider

_TOKEN = re.compile(r"^[A-Za-z0-9]+$")


def parse_int(
    raw: str,
    *,
    min_value: int,
    max_value: int,
    error_message: str,
) -> int:
    text = (raw or "").strip()
    try:
        value = int(text)
    except (TypeError, ValueError):
        raise ValueError(error_message) from None

    if value < min_value or value > max_value:
        raise ValueError(error_message)

    return value


def parse_seed(raw: str) -> int:
    return parse_int(
        raw,
        min_value=0,
        max_value=2**31 - 1,
        error_message=f"seed must be an integer between 0 and {2**31 - 1}",
    )


def parse_state(raw: str) -> DeviceState:
    try:
        return DeviceState.parse(raw)
    except ValueError:
        choices = ", ".join(state.short for state in DeviceState)
        raise ValueError(f"device state must be one of {choices}") from None


def parse_identity(provider: str, platform: str, app_version: str) -> AppIdentity:
    try:
        identity = AppIdentity.parse(provider, platform, (app_version or "").strip())
    except ValueError:
        raise ValueError(
            "provider must be one of "
            + ", ".join(p.value for p in Provider)
            + " and platform one of "
            + ", ".join(p.value for p in Platform)
        ) from None
    if not identity.cataloged:
        raise ValueError(f"{identity.label} is not a cataloged app version")
    return identity


def parse_token(raw: str, *, error_message: str) -> str:
    """Box auth tokens and file ids are plain alphanumerics."""

    text = (raw or "").strip()
    if not _TOKEN.match(text):
        raise ValueError(error_message)
    return text
