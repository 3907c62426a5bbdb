"""Exception types shared across the package."""


class SchottkyLabError(Exception):
    """Base class for all package-specific errors."""


class PoleError(SchottkyLabError):
    """Derivative requested at the pole of a Moebius map."""


class IdentityError(SchottkyLabError):
    """Fixed points requested for the identity map."""


class CIsZeroError(SchottkyLabError):
    """Isometric circle requested for a map fixing infinity (c = 0)."""


class NonLoxodromicError(SchottkyLabError):
    """A group constructor or search received a non-loxodromic generator."""


class DegenerateImage(SchottkyLabError):
    """Image circle of a nested disk underflowed to a point or line."""


class NonConvergedError(SchottkyLabError):
    """An iterative estimator failed to stabilize."""


class NoPairingError(SchottkyLabError):
    """Operation requires a circle pairing but the group has none."""


class DegenerateFit(SchottkyLabError):
    """Box-counting fit attempted on a degenerate point set."""


class DisjointnessError(SchottkyLabError):
    """Generating-curve arcs could not be routed disjointly."""


class OrderingError(SchottkyLabError):
    """Quasi-circle refinement produced an inconsistent cyclic order."""


class DomainViolation(SchottkyLabError):
    """Base class for classical-domain verification failures."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DisjointnessViolation(DomainViolation):
    """Two pairing disks overlap; ``index`` is the offending pair."""


class PairingViolation(DomainViolation):
    """gamma_i does not map circle i onto circle i+g; ``index`` = i."""


class OrientationViolation(DomainViolation):
    """gamma_i maps the exterior of disk i outside disk i+g; ``index`` = i."""


class InconsistentSequence(SchottkyLabError):
    """Domain-sequence steps disagree on the number of entries."""
