"""Shared exception types."""


class EnumerationCapError(RuntimeError):
    """An exhaustive computation would exceed its configured size cap."""

    def __init__(self, message, *, size=None, cap=None):
        super().__init__(message)
        self.size = size
        self.cap = cap


class ConfigError(ValueError):
    """An experiment configuration is malformed or internally inconsistent."""
