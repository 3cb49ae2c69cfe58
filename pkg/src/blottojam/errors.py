"""Exception types shared across the engine."""


class ConfigurationError(ValueError):
    """A configuration or strategy does not satisfy its constraints."""


class UnsupportedModelError(ValueError):
    """The requested operation is not defined for the configured channel model."""
