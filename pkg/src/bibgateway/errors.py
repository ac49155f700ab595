"""Exception types shared across the package."""

from enum import Enum
from typing import Optional


class BibGatewayError(Exception):
    """Base class for all package errors."""


class UnrecognizedIdentifier(BibGatewayError):
    """Input text matched no known identifier pattern."""


class NoMintableId(BibGatewayError):
    """Record carries neither a backend handle nor a URL."""


class NoBackendSelected(BibGatewayError):
    """A search request resolved to an empty backend set."""


class AllBackendsFailed(BibGatewayError):
    """Every query in a search fanout errored."""


class ValidationFailed(BibGatewayError):
    """A write request violated a library invariant."""


class KindChangeRejected(BibGatewayError):
    """Attempt to change an existing post's kind (publication vs bookmark)."""


class TooLarge(BibGatewayError):
    """Attachment exceeds the configured size limit."""


class InsufficientRuns(BibGatewayError):
    """Determinism scoring needs at least two runs."""


class ConnectorErrorKind(str, Enum):
    NOT_FOUND = "not_found"
    UNAUTHORIZED = "unauthorized"
    UPSTREAM = "upstream"
    TIMEOUT = "timeout"
    DECODE = "decode"


class ConnectorError(BibGatewayError):
    """Transport or decode failure talking to a backend.

    ``status`` is only meaningful for the UPSTREAM kind.
    """

    def __init__(self, kind: ConnectorErrorKind, message: str = "",
                 status: Optional[int] = None):
        super().__init__(message or kind.value)
        self.kind = kind
        self.message = message or kind.value
        self.status = status

    def __repr__(self) -> str:
        return f"ConnectorError({self.kind.value!r}, {self.message!r}, status={self.status})"
