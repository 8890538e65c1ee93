"""Exception types shared across the package."""


class CoreachError(Exception):
    """Base class for all package errors."""


class UnknownSort(CoreachError):
    pass


class IllTyped(CoreachError):
    pass


class SortMismatch(CoreachError):
    pass


class InvalidPosition(CoreachError):
    pass


class NonBuiltinResidue(CoreachError):
    """A formula reached the solver layer with constructor symbols left in it."""


class SolverUnavailable(CoreachError):
    pass


class MalformedSolverOutput(CoreachError):
    pass


class GuardednessViolation(CoreachError):
    """A circularity was applied on a branch with no derivative step above it."""


class InvalidSplit(CoreachError):
    pass


class UnsupportedQuantifier(CoreachError):
    """A quantifier ranges over a sort the finite-domain evaluator cannot enumerate."""


class MalformedPath(CoreachError):
    pass


class ParseError(CoreachError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


class ResolutionError(ParseError):
    pass
