"""Shared exception types."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""


class IntegrationInstabilityError(RuntimeError):
    """The time step produced a physically impossible update (blow-up guard).

    Carries ``step`` (the failing step index) when raised from the driver loop.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
