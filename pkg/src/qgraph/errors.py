"""Exception hierarchy."""


class QGraphError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QGraphError):
    pass


class NotAState(ValidationError):
    pass


class NotDeltaForm(ValidationError):
    pass


class NonInvertibleDensity(ValidationError):
    pass


class TraceConstraintViolated(ValidationError):
    pass


class NotCP(ValidationError):
    pass


class MultiBlock(QGraphError):
    pass


class ZeroCorrespondence(QGraphError):
    pass


class NotInSpan(QGraphError):
    pass


class BudgetExceeded(QGraphError):
    pass


class ZeroVector(QGraphError):
    pass


class NotFull(QGraphError):
    pass


class IdealNotInKatsura(QGraphError):
    pass


class ParseError(QGraphError):
    pass


class QInIdeal(QGraphError):
    pass
