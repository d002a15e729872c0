"""Exception hierarchy shared across the package."""


class GapDiffError(Exception):
    """Base class for all package-specific errors."""


class InvalidMeasure(GapDiffError, ValueError):
    """A measure violates a structural invariant (overlap, negative mass, ...)."""


class EmptyMeasure(InvalidMeasure):
    """Measure has no atoms and no segments."""


class NonUnitMass(InvalidMeasure):
    """Total mass differs from 1 by more than the configured tolerance."""


class NonFiniteMean(InvalidMeasure):
    """A position, mass or density is not a finite number."""


class NoTangent(GapDiffError):
    """Truncation tangent root search failed to bracket a solution."""


class OutOfRange(GapDiffError, ValueError):
    """An argument lies outside the admissible range of the operation."""


class DegenerateMeasure(GapDiffError):
    """The measure is a single point mass at its mean; the embedding is trivial."""


class InvalidRate(GapDiffError, ValueError):
    """Exponential rate must be a positive finite number."""


class NotAtomic(GapDiffError, ValueError):
    """Operation requires a purely atomic measure."""


class TooFewStates(GapDiffError, ValueError):
    """A chain needs at least two states."""


class SingularSystem(GapDiffError):
    """The resolvent linear system could not be solved."""


class StepCapExceeded(GapDiffError):
    """A simulated path exceeded the configured step cap."""


class NoDensityAt(GapDiffError, ValueError):
    """The measure has no density segment covering the requested point."""


class GridTooCoarse(GapDiffError, ValueError):
    """Two distinct atoms snap to the same walk-grid site."""


class OutOfInterval(GapDiffError, ValueError):
    """Point lies outside the open interval the operation is defined on."""


class NonAtomicInterior(GapDiffError, ValueError):
    """Eigenfunction recursion requires a purely atomic interior speed measure."""


class EmptySample(GapDiffError, ValueError):
    """Empirical law has no samples."""


class ArbitrageViolation(GapDiffError, ValueError):
    """Call quotes fail monotonicity or convexity in strike."""
