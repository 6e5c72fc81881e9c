"""Exception hierarchy.

Every error raised on purpose derives from :class:`CrackDiffError`; the CLI maps
the three families below onto exit codes 1 (configuration), 2 (solver) and 3 (I/O).
"""

from __future__ import annotations


class CrackDiffError(Exception):
    """Base class for all package errors."""


class ConfigError(CrackDiffError, ValueError):
    """Invalid parameters, grids or run configuration."""


class SolverError(CrackDiffError, RuntimeError):
    """A numerical solve failed."""


class ArtifactError(CrackDiffError, OSError):
    """Run artifacts missing or unreadable."""


# parameters and geometry
class OutOfRange(ConfigError):
    pass


class ProfileMassMismatch(ConfigError):
    pass


class InconsistentMode(ConfigError):
    pass


class AlignmentError(ConfigError):
    pass


class EmptyGrid(ConfigError):
    pass


class DegenerateInterval(ConfigError):
    pass


class OddCellCount(ConfigError):
    pass


class NotBoundaryFace(ConfigError):
    pass


class DeltaMisaligned(ConfigError):
    pass


class DomainMismatch(ConfigError):
    pass


class BetaUnsupported(ConfigError):
    pass


class InsufficientPoints(ConfigError):
    pass


class ZeroDenominator(ConfigError):
    pass


# solvers
class SolverDivergence(SolverError):
    def __init__(self, message: str, iterations: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NaNDetected(SolverError):
    pass


class NoConvergence(SolverError):
    def __init__(self, message: str, iterations: int, last_ratio: float | None):
        super().__init__(message)
        self.iterations = iterations
        self.last_ratio = last_ratio


class MissingArtifact(ArtifactError):
    pass
