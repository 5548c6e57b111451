"""Exception types shared across the package."""


class DivergedError(RuntimeError):
    """A trajectory left the finite range; carries the time of failure."""

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"trajectory diverged at t={self.time:g}")


class ConfigError(ValueError):
    """Experiment configuration is invalid; message names the offending key."""


class ResourceLimitError(RuntimeError):
    """A wall-clock or memory ceiling was exceeded."""
