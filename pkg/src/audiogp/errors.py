"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid session configuration; ``fields`` names the offending entries."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class SessionStateError(RuntimeError):
    """Operation not permitted in the session's current status."""


class ConvergenceError(RuntimeError):
    """Newton mode search did not converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None, iterations=0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class FactorizationError(RuntimeError):
    """Cholesky factorization failed even at the maximum jitter level."""
