"""Exception hierarchy shared by every module."""


class DigavoidError(Exception):
    """Base class for all library errors."""


class InvalidArc(DigavoidError, ValueError):
    pass


class InvalidVertex(DigavoidError, ValueError):
    pass


class GraphSyntaxError(DigavoidError, ValueError):
    """Malformed arc-list text. Carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class UnknownPattern(DigavoidError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown pattern"


class NotAForest(DigavoidError, ValueError):
    pass


class NotATree(DigavoidError, ValueError):
    pass


class TooLarge(DigavoidError):
    """A construction would exceed the vertex cap."""

    def __init__(self, message, required=None, cap=None):
        self.required = required
        self.cap = cap
        super().__init__(message)


class ParameterInfeasible(DigavoidError, ValueError):
    def __init__(self, message, stage=None):
        self.stage = stage
        super().__init__(message if stage is None else f"[{stage}] {message}")


class RetryBudgetExceeded(DigavoidError):
    pass


class ResampleBudgetExceeded(DigavoidError):
    """Resampling gave up; ``surviving`` lists the events still violated."""

    def __init__(self, message, surviving=(), rounds=0, restarts=0, stage=None):
        self.surviving = list(surviving)
        self.rounds = rounds
        self.restarts = restarts
        self.stage = stage
        super().__init__(message)


class ColoringInvalid(DigavoidError, ValueError):
    pass


class NotTripartite(DigavoidError, ValueError):
    pass


class VNotIndependent(DigavoidError, ValueError):
    pass


class RestrictionInfeasible(DigavoidError):
    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)


class NotRegular(DigavoidError, ValueError):
    pass


class NotRegularAvoidable(DigavoidError):
    """The pattern is a grounded forest; ``certificate`` re-verifies it."""

    def __init__(self, message, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class BudgetExceeded(DigavoidError):
    pass


class VerificationFailed(DigavoidError):
    """An operation's own postcondition check failed (never silently returned)."""

    def __init__(self, message, violations=()):
        self.violations = list(violations)
        super().__init__(message)
