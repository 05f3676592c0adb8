"""Exception hierarchy shared by all computational modules."""


class ExtSourceError(Exception):
    """Base class for errors raised by this package."""


class PhaseError(ExtSourceError):
    """Parameters are outside the three-cut regime b = a**2 > 3."""


class PoleAtXi(ExtSourceError):
    """z(xi) evaluated at one of its poles 0, +a, -a."""


class ContinuationFailure(ExtSourceError):
    """Root tracking along a path could not keep the sheets apart."""


class OrderingViolation(ExtSourceError):
    """Branch points came out unordered, which signals a mispaired critical point."""


class QuadratureNonConvergence(ExtSourceError):
    pass


class DegenerateEdge(ExtSourceError):
    """The second derivative of z(xi) vanishes at a critical point."""


class PathCrossesCut(ExtSourceError):
    pass


class BranchPointSingularity(ExtSourceError):
    pass


class OutOfSupport(ExtSourceError):
    pass


class IllConditioned(ExtSourceError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PrecisionLoss(ExtSourceError):
    pass


class EigenSolverFailure(ExtSourceError):
    pass
