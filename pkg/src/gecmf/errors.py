"""Exception types shared across the toolkit."""

from __future__ import annotations


class GecmfError(Exception):
    """Base class for all toolkit errors."""


class TokenError(GecmfError, ValueError):
    """A surface token violates the token contract (empty or contains whitespace)."""


class EditError(GecmfError, ValueError):
    """An edit or edit set violates its structural invariants."""


class EditApplicationError(GecmfError):
    """An edit cannot be applied because its span falls outside the source."""

    def __init__(self, message: str, edit=None):
        super().__init__(message)
        self.edit = edit


class M2ParseError(GecmfError):
    """Malformed M2 input; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class M2ValidationError(GecmfError):
    """Structurally parsable M2 whose edits violate edit-set invariants."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ResidualKindError(GecmfError, TypeError):
    """An operation received a residual edit of the wrong kind."""


class ConfigurationError(GecmfError, ValueError):
    """Invalid or missing configuration for an operation."""


class PieceMergeError(GecmfError, ValueError):
    """A subword piece sequence cannot be merged (leading continuation piece)."""


class CandidateRankError(GecmfError, LookupError):
    """A requested candidate rank exceeds the available depth at some mask."""

    def __init__(self, message: str, mask_index: int):
        super().__init__(message)
        self.mask_index = mask_index


class EmptyGoldError(GecmfError, ValueError):
    """Mask-level evaluation was asked to score against an empty gold."""


class TransportError(GecmfError, RuntimeError):
    """Retryable failure talking to the remote fill-mask service."""


class ProtocolError(GecmfError, RuntimeError):
    """The remote fill-mask service violated the wire contract."""
