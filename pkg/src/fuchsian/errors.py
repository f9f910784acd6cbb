"""Exception types raised by the fuchsian package."""


class FuchsianError(Exception):
    """Base class for all package errors."""


class InvalidPoint(FuchsianError):
    """A vector does not lie on the unit hyperboloid sheet."""


class OutsideBall(FuchsianError):
    """Klein coordinates outside the open unit ball."""


class NotAnIsometry(FuchsianError):
    """A matrix does not preserve the Minkowski bilinear form."""


class DegenerateTriangle(FuchsianError):
    """Spherical triangle inequality violated beyond tolerance."""


class ChartViolation(FuchsianError):
    """Z-V-C coordinates outside the valid chart region."""


class PairingFailure(FuchsianError):
    """A side-pairing isometry fails to match paired edge endpoints."""


class NotConvex(FuchsianError):
    """A seed vertex lies in the convex hull of the other orbit points."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class TruncationUnstable(FuchsianError):
    """Hull incidence did not stabilize within the word-length cap."""


class AngleOverflow(FuchsianError):
    """A cone angle reached 2*pi or more."""


class TriangleInequality(FuchsianError):
    """Edge lengths of a simplex violate the strict triangle inequality."""


class GluingMismatch(FuchsianError):
    """Edge-slot gluing is not a fixed-point-free involution or lengths differ."""


class EulerMismatch(FuchsianError):
    """Triangulated surface has the wrong Euler characteristic."""


class AngleOutOfRange(FuchsianError):
    """A cone angle lies outside (0, 2*pi)."""


class LabelMismatch(FuchsianError):
    """A triangulation labeling does not match the surface combinatorics."""


class CombinatoricsChange(FuchsianError):
    """Hull incidence differs from the reference labeling."""


class HomotopyBlocked(FuchsianError):
    """An intermediate blend is not a valid cone metric at the minimal step."""


class DivergedStep(FuchsianError):
    """Gauss-Newton residual increased after maximal damping."""


class NotACap(FuchsianError):
    """Input does not satisfy the convex-cap preconditions."""


class CenterSingularity(FuchsianError):
    """Radial decomposition requested at the model center."""


class NotInfinitesimalIsometry(FuchsianError):
    """Matrix is not in the Lie algebra of the isometry group."""


class SchemaError(FuchsianError):
    """A JSON input file does not match its schema."""
