class ConfigError(ValueError):
    """Invalid run configuration or precondition violation."""


class NumericError(RuntimeError):
    """A numerical routine (eigensolver, factorization) failed."""
