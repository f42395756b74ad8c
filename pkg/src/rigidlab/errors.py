"""Exception hierarchy.

Validation problems derive from ``ValidationError``; numeric gates that refuse
to produce untrustworthy output derive from ``NumericGate``.  The CLI maps the
two families to distinct exit codes.
"""


class RigidLabError(Exception):
    pass


class ValidationError(RigidLabError, ValueError):
    pass


class NumericGate(RigidLabError, ArithmeticError):
    pass


class NotUnimodular(ValidationError):
    pass


class NotHyperbolic(ValidationError):
    pass


class Overflow(NumericGate):
    pass


class PrecisionLoss(NumericGate):
    pass


class CostGate(NumericGate):
    pass


class NonPositiveRoof(ValidationError):
    pass


class EmptyCatalog(ValidationError):
    pass


class BaseMismatch(ValidationError):
    pass


class ResonanceAtTruncation(NumericGate):
    pass


class StepTooSmall(NumericGate):
    pass


class TiltTooLarge(ValidationError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class NotConverged(NumericGate):
    pass


class Inconclusive(NumericGate):
    pass


class ToleranceAmbiguity(NumericGate):
    pass


class InvalidAssignment(ValidationError):
    pass


class HypothesisViolated(ValidationError):
    pass


class ConfigError(ValidationError):
    """Config problem, carrying the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
