class InvalidInput(ValueError):
    """Argument violates an operation's precondition."""


class ConfigError(ValueError):
    """Simulation configuration is malformed or inconsistent."""
