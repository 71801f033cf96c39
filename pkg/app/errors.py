"""Exception hierarchy shared by readers, services and the CLI."""

from __future__ import annotations

from typing import Optional


class CloudsiftError(Exception):
    """Base class for every error raised on purpose by the toolkit."""


class EvidenceOpenError(CloudsiftError):
    pass


class EvidenceNotFoundError(CloudsiftError, KeyError):
    def __init__(self, path: str) -> None:
        super().__init__(path)
        self.path = path

    def __str__(self) -> str:
        return f"not found in evidence tree: {self.path}"


class FormatError(CloudsiftError, ValueError):
    """Input bytes do not follow the expected file format."""


class WalModeError(FormatError):
    pass


class Utf16DatabaseError(FormatError):
    pass


class TruncatedPageError(FormatError):
    def __init__(self, page: int) -> None:
        super().__init__(f"page {page} is truncated or out of range")
        self.page = page


class UnknownTableError(CloudsiftError, KeyError):
    def __init__(self, table: str) -> None:
        super().__init__(table)
        self.table = table

    def __str__(self) -> str:
        return f"unknown table: {self.table}"


class UnsupportedTableError(FormatError):
    pass


class PlistFormatError(FormatError):
    def __init__(self, message: str, offset: Optional[int] = None) -> None:
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class PlistCycleError(PlistFormatError):
    pass


class JsonFormatError(FormatError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class RegistryError(CloudsiftError):
    pass


class MixedProviderError(CloudsiftError, ValueError):
    pass


class UncatalogedIdentityError(CloudsiftError, ValueError):
    pass


__all__ = [
    "CloudsiftError",
    "EvidenceOpenError",
    "EvidenceNotFoundError",
    "FormatError",
    "WalModeError",
    "Utf16DatabaseError",
    "TruncatedPageError",
    "UnknownTableError",
    "UnsupportedTableError",
    "PlistFormatError",
    "PlistCycleError",
    "JsonFormatError",
    "RegistryError",
    "MixedProviderError",
    "UncatalogedIdentityError",
]
