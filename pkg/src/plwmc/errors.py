"""Exception hierarchy shared by every stage of the pipeline."""


class PlwmcError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParseError(PlwmcError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class ValidationError(PlwmcError):
    """Raised when a program has diagnostics and the caller asked for strictness."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class BudgetExceeded(PlwmcError):
    exit_code = 3


class GroundingBudgetError(BudgetExceeded):
    pass


class CompileBudgetError(BudgetExceeded):
    pass


class InconsistentEvidenceError(PlwmcError):
    """P(E=e) is zero."""

    exit_code = 2


class UnsupportedProgramError(PlwmcError):
    """Some total choice yields a three-valued well-founded model."""

    exit_code = 4


class LoopError(PlwmcError):
    """Clark's completion requested on a program with positive loops."""


class SampleSatError(PlwmcError):
    """Local search ran out of flips without reaching a satisfying assignment."""


class PartialAssignmentError(ValueError):
    pass
