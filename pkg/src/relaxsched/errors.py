"""Exception hierarchy shared by all simulator components."""


class RelaxschedError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(RelaxschedError):
    """Scheduler state was mutated in an illegal way (duplicate insert,
    delete of a nonresident task).  Indicates a workload bug; aborts the run."""


class ContractError(RelaxschedError):
    """An operation precondition was violated by the caller
    (non-decreasing key, charging a processable task, ...)."""


class EmptySchedulerError(RelaxschedError):
    """ApproxGetMin on an empty scheduler."""


class DeadlockError(RelaxschedError):
    """The execution loop made no progress for a full fairness window even
    though the top task was returned.  Only reachable with a buggy workload."""


class InputError(RelaxschedError):
    """Invalid input data (nonpositive edge weight, bad config values, ...)."""


class ParseError(InputError):
    """Malformed input file.  Carries the offending line number when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif path is not None:
            where += " "
        super().__init__(where + message)
