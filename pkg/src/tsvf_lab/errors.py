"""Exception types raised by tsvf_lab.

Domain errors derive from :class:`TSVFError` so the CLI can map them to a
single exit status and print the class name.
"""


class TSVFError(Exception):
    """Base class for domain errors."""


class NotHermitianError(TSVFError, ValueError):
    pass


class DimensionMismatchError(TSVFError, ValueError):
    pass


class SpectralConvergenceError(TSVFError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class VanishingPostSelection(TSVFError):
    """The post-selection has zero probability for the measurement in question."""


class OrthogonalSelections(TSVFError):
    """Pre- and post-selected states are orthogonal; the weak value is undefined."""


class NoPostSelectedShots(TSVFError):
    pass


class GridTooNarrow(TSVFError, ValueError):
    pass


class NoBracketingCompleteMeasurements(TSVFError):
    pass


class InterveningRecord(TSVFError):
    pass


class WorldFileError(TSVFError, ValueError):
    """Malformed world file. ``lineno`` is 1-based, or None for whole-file problems."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ValidationFailed(TSVFError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = ", ".join(f"({d}, {k})" for d, k, *_ in self.violations)
        super().__init__(f"{len(self.violations)} violation(s): {lines}")


class RecordAtQueryTime(TSVFError, ValueError):
    """The counterfactual time coincides with an actual record."""
