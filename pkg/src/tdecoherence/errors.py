"""Exception and warning types shared across the package.

Validation problems derive from ``ValidationError`` (a ``ValueError``);
numerical-guard failures derive from ``GuardError``.  The CLI maps the two
families to distinct exit codes.
"""


class ValidationError(ValueError):
    """An input violates a documented invariant."""


class GuardError(ArithmeticError):
    """A numerical validity guard was tripped."""


class PostNewtonianWarning(UserWarning):
    """|Phi|/c^2 exceeded the post-Newtonian validity bound; result still returned."""


# geometry
class NonContiguousWorldLine(ValidationError):
    pass


class SuperluminalSegment(ValidationError):
    pass


class OutsideRindlerWedge(ValidationError):
    pass


class GuardTripped(GuardError):
    """A weak-field or slow-motion bound (|Phi|/c^2, (p/mc)^2 < 1e-3) was violated."""


class PostNewtonianGuardTripped(GuardTripped):
    pass


# internal
class InvalidPopulation(ValidationError):
    pass


class TruncationTooSevere(ValidationError):
    pass


class LevelCapExceeded(ValidationError):
    pass


# coherence
class NonPositiveArgument(ValidationError):
    pass


class UnsupportedLaw(ValidationError):
    pass


# dynamics
class DimensionMismatch(ValidationError):
    pass


class NoRealRoot(GuardError):
    pass


class WrongSignature(ValidationError):
    pass


class StepSizeTooCoarse(GuardError):
    pass


# scenario files
class ParseError(ValidationError):
    """Scenario text could not be parsed; carries line/field context in the message."""


class InapplicableParameter(ValidationError):
    pass
