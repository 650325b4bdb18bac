"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, missing field, bad value)."""


class DatasetError(ValueError):
    """CSV dataset ingestion failure; message carries the offending row number."""


class SingularMatrixError(ValueError):
    """Triangular factor with a nonpositive or zero diagonal entry."""


class CapabilityError(RuntimeError):
    """Operation requested from a target that does not support it."""
