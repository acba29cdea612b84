"""Exception types shared across the package."""

from __future__ import annotations


class QuadbemError(Exception):
    """Base class for package-specific failures."""


class SolverFailureError(QuadbemError):
    """Induced-velocity (or similar implicit) solve did not converge.

    Carries the operating point so callers can log or re-sample it.
    """

    def __init__(self, message: str, operating_point=None):
        super().__init__(message)
        self.operating_point = operating_point


class DegenerateGeometryError(QuadbemError):
    """Propeller geometry yields a singular flapping system."""


class SingularFitError(QuadbemError):
    """Least-squares identification has no unique solution."""


class SyncFailureError(QuadbemError):
    """Clock synchronisation found no acceptable correlation peak."""


class BundleFormatError(QuadbemError):
    """Residual-network bundle file is malformed or inconsistent."""


class HistoryNotReadyError(QuadbemError):
    """Inference requested before the history buffer is full."""
