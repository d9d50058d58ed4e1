"""Exception hierarchy shared by every module."""


class SAWError(Exception):
    """Base class for all errors raised by this package."""


class EndpointOutOfRange(SAWError, ValueError):
    pass


class SelfLoop(SAWError, ValueError):
    pass


class GraphParseError(SAWError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class InfeasibleParameters(SAWError, ValueError):
    pass


class ResampleLimitExceeded(SAWError, RuntimeError):
    pass


class BudgetExceeded(SAWError, RuntimeError):
    """A search ran past its node budget.

    ``partial`` carries whatever was computed before the abort (for a census
    this is a :class:`~sawgraph.exact.SawCensus` with ``valid=False``).
    """

    def __init__(self, message, partial=None, nodes=None):
        super().__init__(message)
        self.partial = partial
        self.nodes = nodes


class InvalidCensus(SAWError, ValueError):
    pass


class NotTransitive(SAWError, ValueError):
    pass


class NotRegular(SAWError, ValueError):
    pass


class DegreeTooSmall(SAWError, ValueError):
    pass


class KOutOfRange(SAWError, ValueError):
    pass


class PreconditionViolated(SAWError, ValueError):
    pass


class DegenerateEnvelope(SAWError, ValueError):
    pass


class EmptyStats(SAWError, ValueError):
    pass
