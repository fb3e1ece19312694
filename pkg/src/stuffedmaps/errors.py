"""Exception types raised by the stuffed-map engine."""


class StuffedMapsError(Exception):
    """Base class for all errors raised by this package."""


class NonUnit(StuffedMapsError, ZeroDivisionError):
    """A series without an invertible leading (cell-degree 0) part was inverted."""


class TruncationExceeded(StuffedMapsError):
    """A coefficient was requested beyond the retained cell degree."""


class NonConvergence(StuffedMapsError):
    """A graded fixed point failed to stabilize within the expected number of rounds."""


class CapExceeded(StuffedMapsError):
    """An oracle query needs more half-edges than the configured cap."""


class InconsistentGrading(StuffedMapsError):
    """The Wick expansion produced a power of N outside the topological range."""


class DegenerateBranchPoint(StuffedMapsError):
    """The spectral curve has a non-simple branch point (non-tame weights)."""


class ResidueObstruction(StuffedMapsError):
    """A primitive was requested for a form with non-vanishing residues."""


class MissingDependency(StuffedMapsError):
    """A correlator of lower topology needed by a computation is not available."""


class PoleLeak(StuffedMapsError):
    """A correlator acquired poles outside the branch points."""
