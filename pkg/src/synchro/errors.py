"""Exception hierarchy shared by every analysis."""


class SynchroError(Exception):
    """Base class for all library errors."""


class InputError(SynchroError, ValueError):
    """Malformed automaton, out-of-range index, or violated precondition."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NotSynchronizingError(InputError):
    pass


class BudgetExceeded(SynchroError):
    """A bounded search ran out of nodes, time, or was cancelled."""

    def __init__(self, message, explored=None):
        self.explored = explored
        super().__init__(message)


class ExtensionFailure(SynchroError):
    """No extension word exists for the current set.

    Carries the stuck set and the two structural facts that would have
    ruled the failure out had both been true.
    """

    def __init__(self, stuck, synchronizing, strongly_connected):
        self.stuck = stuck
        self.synchronizing = synchronizing
        self.strongly_connected = strongly_connected
        super().__init__(
            f"no extension word for S={stuck} "
            f"(synchronizing={synchronizing}, strongly_connected={strongly_connected})"
        )


class BoundAnomaly(SynchroError):
    """A step exceeded a length cap that a known theorem guarantees."""

    def __init__(self, stuck, cap):
        self.stuck = stuck
        self.cap = cap
        super().__init__(f"no extension word of length <= {cap} for S={stuck}")
