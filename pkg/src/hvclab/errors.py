"""Exception hierarchy shared by every module.

The CLI maps :class:`DomainError` subclasses to exit code 1 and
:class:`ResourceError` subclasses to exit code 2.
"""


class HvcError(Exception):
    """Base class for all library errors."""


class DomainError(HvcError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class PreconditionError(DomainError):
    """An input violates a documented precondition (e.g. a non-satisfying labeling)."""


class DecodeError(DomainError):
    """A decoder found nothing to extract from."""


class ParseError(DomainError):
    """Malformed JSON input; names the file and the offending field."""

    def __init__(self, path, field, reason):
        self.path = path
        self.field = field
        super().__init__(f"{path}: field {field!r}: {reason}")


class PropertyViolation(HvcError):
    """A property the underlying theory guarantees did not hold on this instance."""


class ResourceError(HvcError):
    """An instance exceeds a configured size cap or search budget."""


class SizeError(ResourceError):
    pass


class BudgetExhausted(ResourceError):
    """Raised by the exact solver; carries the best cover found and the proven bound."""

    def __init__(self, message, best=None, best_weight=None, lower_bound=None, nodes=0):
        super().__init__(message)
        self.best = best
        self.best_weight = best_weight
        self.lower_bound = lower_bound
        self.nodes = nodes
