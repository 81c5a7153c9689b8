"""Base exception types shared across the pipeline."""


class NearMissError(Exception):
    """Base class for every error the pipeline raises on purpose.

    The CLI turns these into a one-line ``error: <Class>: <message>``
    diagnostic and a nonzero exit status.
    """


class MissingArtifactError(NearMissError):
    """Raised when a command needs an upstream artifact that is absent."""

    def __init__(self, path: object, hint: str = "") -> None:
        """Build the message from the missing path and an optional hint."""
        self.path = path
        msg = f"missing artifact: {path}"
        if hint:
            msg = f"{msg} ({hint})"
        super().__init__(msg)
