"""Exception taxonomy shared by the pipeline, service, and CLI.

Each error class maps to one wire `kind` and one CLI exit code, so the
classification of a failure survives the trip through the HTTP layer.
"""

from __future__ import annotations


class VigilError(Exception):
    """Base class for all pipeline errors."""

    kind = "internal"


class InputError(VigilError):
    """The caller supplied unusable input (bad image, bad parameters)."""

    kind = "input"


class TileTooSmallError(VigilError):
    """A localization tile would fall below the minimum classifiable size."""

    kind = "tile"


class BackendError(VigilError):
    """The classification backend failed (distinct from input errors)."""

    kind = "backend"


class BackendContractError(BackendError):
    """A backend returned something that is not a probability distribution."""


class SessionError(VigilError):
    """A video session id is unknown or already finalized."""

    kind = "session"
