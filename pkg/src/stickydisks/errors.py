"""Exception types raised across the package."""


class StickyDiskError(Exception):
    """Base class for all package errors."""


# packing validation
class EmptyPacking(StickyDiskError):
    pass


class NonpositiveRadius(StickyDiskError):
    pass


class OverlapError(StickyDiskError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IndexOutOfRange(StickyDiskError):
    pass


class InvalidTolerance(StickyDiskError):
    pass


class PackingFormatError(StickyDiskError):
    pass


# graphs
class SelfLoop(StickyDiskError):
    pass


class MultiEdge(StickyDiskError):
    pass


class TooLarge(StickyDiskError):
    pass


# linear algebra
class NotInContact(StickyDiskError):
    pass


class RankTolAmbiguous(StickyDiskError):
    """A singular value sits inside the ambiguity band around the rank threshold."""


class CoincidentNeighbors(StickyDiskError):
    pass


# generators
class PlacementFailure(StickyDiskError):
    pass


class NoIntersection(StickyDiskError):
    pass


class NotInfRigid(StickyDiskError):
    pass


class NewtonDivergence(StickyDiskError):
    pass


class ContactGraphChanged(StickyDiskError):
    pass


# flex following
class RigidInput(StickyDiskError):
    pass


class StratumExit(StickyDiskError):
    """The trajectory left the set of packings with the given contact graph."""

    def __init__(self, message, step):
        super().__init__(f"step {step}: {message}")
        self.step = step


class ContactBroken(StratumExit):
    pass


class NewContact(StratumExit):
    pass


class CorrectorDivergence(StratumExit):
    pass


# jamming
class LPNumericalFailure(StickyDiskError):
    pass


class DegenerateGauge(StickyDiskError):
    pass
