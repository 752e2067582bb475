"""
Exception hierarchy for DelassusBench
"""


class DelassusError(Exception):
    """Base error; exit_code is what the CLI returns for it."""
    exit_code = 2


class ModelError(DelassusError):
    """Invalid kinematic tree, constraint set or configuration."""


class NonTopologicalOrder(ModelError):
    pass


class NonPositiveMass(ModelError):
    pass


class BadAxis(ModelError):
    pass


class RankDeficientK(ModelError):
    pass


class BadLinkIndex(ModelError):
    pass


class InvalidGeometry(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class NonUnitQuaternion(ModelError):
    pass


class ChainMismatch(ModelError):
    pass


class NotAncestor(ModelError):
    pass


class UrdfError(ModelError):
    """URDF document could not be turned into a tree."""


class MalformedXml(UrdfError):
    pass


class MultipleRoots(UrdfError):
    pass


class CyclicJointGraph(UrdfError):
    pass


class UnsupportedJointType(UrdfError):
    pass


class SpecError(DelassusError):
    """Bad benchmark or command-line specification."""


class InsufficientPoints(SpecError):
    pass


class NonPositiveValue(SpecError):
    pass


class InvalidSuite(SpecError):
    pass


class NumericalError(DelassusError):
    """Factorization failure on an input that should be positive definite."""
    exit_code = 3


class SingularJsim(NumericalError):
    pass


class SingularD(NumericalError):
    pass
