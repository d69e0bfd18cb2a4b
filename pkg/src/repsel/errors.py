"""Exception and warning types shared across the package.

Names follow the error contracts of the public operations; everything
derives from :class:`RepselError` so callers can catch broadly.
"""


class RepselError(Exception):
    """Base class for all package errors."""


# --- grid / parsing ---------------------------------------------------------

class MissingKeyword(RepselError):
    """A required keyword (SPECGRID, COORD, ZCORN) is absent from the file."""

    def __init__(self, keyword, message=None):
        self.keyword = keyword
        super().__init__(message or f"missing required keyword {keyword!r}")


class ArityMismatch(RepselError):
    """A keyword's value array has the wrong length."""

    def __init__(self, keyword, expected, got):
        self.keyword = keyword
        self.expected = expected
        self.got = got
        super().__init__(
            f"keyword {keyword!r}: expected {expected} values, got {got}")


class MalformedNumber(RepselError):
    """A token inside a keyword's data cannot be parsed as a number."""

    def __init__(self, keyword, token, offset):
        self.keyword = keyword
        self.token = token
        self.offset = offset
        super().__init__(
            f"keyword {keyword!r}: malformed number {token!r} "
            f"at value offset {offset}")


class IndexOutOfRange(RepselError):
    """Cell index outside the grid dimensions."""


class InvalidGeometry(RepselError):
    """Grid data is lexically fine but geometrically unusable."""


# --- ensemble / variance ----------------------------------------------------

class SubsetTooSmall(RepselError):
    """Variance needs at least two realizations."""


class UnknownProperty(RepselError):
    """Requested property name is not part of the ensemble."""


class EmptyVoi(RepselError):
    """Operation requires a non-empty volume of interest."""


class CoverageMismatch(RepselError):
    """Two per-cell fields do not cover the same cells."""


class InvalidSpec(RepselError):
    """Synthetic ensemble specification is inconsistent."""


# --- embedding / clustering -------------------------------------------------

class AsymmetricInput(RepselError):
    """Distance matrix is not symmetric."""


class NonzeroDiagonal(RepselError):
    """Distance matrix has a nonzero diagonal."""


class NonpositiveSigma(RepselError):
    """Kernel bandwidth must be positive."""


class KTooLarge(RepselError):
    """More clusters requested than nodes available."""


# --- representative set -----------------------------------------------------

class AlreadyMember(RepselError):
    """Candidate realization is already in the representative set."""


# --- spatial queries --------------------------------------------------------

class InactiveCell(RepselError):
    """Operation applies to active cells only."""


class DegenerateCell(RepselError):
    """Cell has zero volume and cannot be clipped."""


# --- interaction ------------------------------------------------------------

class CoincidentWithCenter(RepselError):
    """Arcball endpoint coincides with the rotation center."""


class InsufficientSamples(RepselError):
    """Velocity estimation needs at least two samples."""


class PairingViolation(RepselError):
    """Press/release events for a button do not alternate."""


class EmptyCarousel(RepselError):
    """Carousel has no items."""


# --- session / service ------------------------------------------------------

class WorkflowOrder(RepselError):
    """Operation invoked out of workflow order."""


class StaleGraph(RepselError):
    """Cluster graph predates the current VOI revision."""


class ReplayMismatch(RepselError):
    """Replaying a session file did not reproduce its recorded outcome."""


# --- warnings ----------------------------------------------------------------

class NonConvexWarning(UserWarning):
    """Cell volume came out negative; geometry is inverted or badly twisted."""


class SmallVoiWarning(UserWarning):
    """VOI has fewer cells than histogram bins; MI estimates will be coarse."""
