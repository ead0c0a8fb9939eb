"""Exception hierarchy shared by every layer of the workbench."""


class WorkbenchError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class IndexOutOfRange(WorkbenchError):
    pass


class SignatureMismatch(WorkbenchError):
    pass


class UnknownAtom(WorkbenchError):
    pass


class UnknownOp(WorkbenchError):
    pass


class ArityMismatch(WorkbenchError):
    pass


class FormulaSyntaxError(WorkbenchError):
    pass


class UnknownSymbol(WorkbenchError):
    pass


class BudgetExceeded(WorkbenchError):
    pass


class InvariantViolation(WorkbenchError):
    pass


class BadWitnessChain(WorkbenchError):
    pass


class ReductError(WorkbenchError):
    pass


class NotSurjective(ReductError):
    pass


class MeaningMismatch(ReductError):
    pass


class ValidityMismatch(ReductError):
    pass


class IncompatibleParts(WorkbenchError):
    pass


class NotCondSubstitutional(WorkbenchError):
    pass


class ArityVsVariables(WorkbenchError):
    pass


class NoSpareVariables(WorkbenchError):
    pass


class UnknownScenario(WorkbenchError):
    pass


class ScenarioMismatch(AssertionError):
    """Raised when a scenario's recomputed verdicts disagree with its expectations."""


class InputError(WorkbenchError):
    """Malformed workbench file or unresolved reference."""
