# genop/exceptions.py
from typing import Optional


class GenopError(Exception):
    """Base class of every error raised by the genop library."""

    def __init__(self, message: str, invariant: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.invariant = invariant

    def as_dict(self) -> dict:
        return {
            "type": type(self).__name__,
            "message": self.message,
            "invariant": self.invariant,
        }


class DomainError(GenopError):
    """A mathematical precondition does not hold (non-associative table, bad broad relation, ...)."""


class ParseError(GenopError):
    """Malformed input text, JSON or command schema."""

    def __init__(self, message: str, position: Optional[int] = None, field: Optional[str] = None):
        super().__init__(message, invariant="syntax")
        self.position = position
        self.field = field

    def as_dict(self) -> dict:
        data = super().as_dict()
        data["position"] = self.position
        data["field"] = self.field
        return data


class BoundExceeded(GenopError):
    """An enumeration or size bound from the GENOP settings would be exceeded."""

    def __init__(self, message: str, bound: Optional[str] = None):
        super().__init__(message, invariant=bound or "bound")
