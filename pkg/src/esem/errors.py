"""Exception hierarchy shared across the package."""


class Error(Exception):
    """Base class for all package-specific errors."""


class DecodeError(Error, ValueError):
    """Malformed, truncated or non-canonical byte encoding."""


class ParameterError(Error, ValueError):
    """Scheme parameters violate a structural or security invariant."""


class IntegrityError(Error):
    """A file's trailing integrity tag does not match its contents."""


class CounterError(Error):
    """Signing counter could not be reserved durably; signing must refuse."""


class ProtocolError(Error):
    """Malformed wire frame or protocol violation."""


class UnknownKeyError(Error):
    """Party server holds no share for the requested key id."""


class CommitmentUnavailable(Error):
    """The commitment source could not reconstruct R.

    Distinguished from verification rejection: this is a liveness failure,
    not evidence of forgery.  ``diagnostics`` maps party index (or endpoint)
    to the underlying error message.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
