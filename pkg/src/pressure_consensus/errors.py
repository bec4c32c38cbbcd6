"""Exception hierarchy.

Every concrete error carries a ``code`` equal to its class name so the CLI
can emit it on a machine-parseable diagnostic line.
"""


class PressureConsensusError(Exception):
    """Base class for all errors raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidInputError(PressureConsensusError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(PressureConsensusError, ArithmeticError):
    """A computation broke down numerically."""


class NonSquareMatrix(InvalidInputError):
    pass


class NonzeroDiagonal(InvalidInputError):
    pass


class NegativeWeight(InvalidInputError):
    pass


class NonpositiveStubbornness(InvalidInputError):
    pass


class DisconnectedGraph(InvalidInputError):
    pass


class DimensionMismatch(InvalidInputError):
    pass


class NonfiniteInput(InvalidInputError):
    pass


class NonpositiveRho(InvalidInputError):
    pass


class InvalidSchedule(InvalidInputError):
    pass


class AlphaOutOfRange(InvalidInputError):
    pass


class QOutOfRange(InvalidInputError):
    pass


class AtFixedPoint(InvalidInputError):
    pass


class ConfigError(InvalidInputError):
    """Malformed scenario configuration (unknown fields, wrong types)."""


class SingularSystem(NumericalError):
    pass


class NormIterationDiverged(NumericalError):
    pass


class ScheduleOverflow(NumericalError):
    pass
