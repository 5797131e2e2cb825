"""Shared exception base for the package."""


class IntentGateError(Exception):
    """Base class for all intentgate errors."""
