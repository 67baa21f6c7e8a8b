"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment or model configuration (CLI exit code 2)."""


class DimensionError(ValueError):
    """Shape mismatch between interacting arrays."""


class NumericError(RuntimeError):
    """Numerical failure at runtime (CLI exit code 3)."""


class CertificationError(RuntimeError):
    """Strong-stability certification failed."""

    reason = "uncertifiable"


class UnstableSystemError(CertificationError):
    """Closed loop has spectral radius at or above one."""

    reason = "unstable"


class UncertifiableError(CertificationError):
    """Closed loop is defective beyond the conditioning tolerance."""

    reason = "uncertifiable"
