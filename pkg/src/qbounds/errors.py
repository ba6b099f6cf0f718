"""Exception hierarchy.

Every error carries the name of the module that raised it so CLI reports can
surface where a computation failed.
"""

from __future__ import annotations


class QBoundsError(Exception):
    module = "qbounds"

    def __init__(self, message: str, module: str | None = None):
        super().__init__(message)
        if module is not None:
            self.module = module


class TruncationError(QBoundsError):
    module = "fock"


class SpaceMismatch(QBoundsError):
    module = "fock"


class DomainError(QBoundsError, ValueError):
    module = "catalog"


class DegenerateState(QBoundsError):
    module = "catalog"


class WeightError(QBoundsError, ValueError):
    module = "catalog"


class PovmBoundError(QBoundsError, ValueError):
    module = "catalog"


class SingularP(QBoundsError):
    module = "phase_space"


class ConvergenceError(QBoundsError):
    module = "phase_space"


class QuadratureError(QBoundsError):
    module = "phase_space"


class InfiniteTrace(QBoundsError):
    module = "bounds"


class NotGaussian(QBoundsError):
    module = "bounds"


class DensityUnsupported(QBoundsError):
    module = "robustness"


class TailError(QBoundsError):
    module = "trace_estimation"


class UnsupportedJ(QBoundsError, ValueError):
    module = "su2"


class ConfigError(QBoundsError, ValueError):
    module = "cli"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
