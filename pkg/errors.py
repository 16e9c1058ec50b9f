"""
Exception types for the sphere-sphere Casimir package
Library code raises these; the service layer turns them into error payloads
"""

from typing import Optional


class CasimirError(Exception):
    """Base class for all package errors"""


class RangeError(CasimirError):
    """Requested value lies outside the tabulated or asymptotic range"""


class ConvergenceError(CasimirError):
    """Quadrature or series did not reach the requested tolerance"""


class TableFormatError(CasimirError):
    """Malformed permittivity table"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GeometryError(CasimirError):
    """Bispherical coordinates failed to reproduce the sphere geometry"""


class DecimationError(CasimirError):
    """Round-trip matrix lost positive definiteness after decimation"""

    def __init__(self, message: str, m: int):
        self.m = m
        super().__init__(f"{message} (m={m})")


class IdentityError(CasimirError):
    """Classical/positive-frequency decomposition does not add up"""


class ConfigError(CasimirError):
    """Invalid run configuration"""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)
