"""Exception hierarchy.

Everything raised deliberately by the library derives from :class:`NBoxError`,
so callers (and the command line) can separate domain failures from bugs.
"""


class NBoxError(Exception):
    """Base class for all library errors."""


class DimensionError(NBoxError, ValueError):
    """Operands live in different (or unsupported) Hilbert space dimensions."""


class NormalizationError(NBoxError, ValueError):
    """A vector passed as a state does not have unit norm."""


class DegenerateSpanError(NBoxError, ValueError):
    """A set of vectors spans only the zero subspace."""


class MeasurementError(NBoxError, ValueError):
    """A family of projectors is not a valid projective measurement."""


class ZeroProbabilityOutcome(NBoxError):
    """An update was requested for an outcome that cannot occur."""


class PointerBasisError(NBoxError, ValueError):
    """A projector range is not spanned by a subset of the pointer basis."""


class LabelError(NBoxError, KeyError):
    """Unknown outcome label."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PostselectionImpossible(NBoxError):
    """Every joint probability vanishes, so conditioning is undefined."""


class ProbabilityError(NBoxError, ArithmeticError):
    """A computed probability fell outside the float-noise allowance.

    This signals an internal inconsistency, not bad user input.
    """


class InsufficientDataError(NBoxError, ValueError):
    """No post-selected trials are available to estimate from."""


class ParseError(NBoxError, ValueError):
    """Experiment text is not well-formed."""

    def __init__(self, message, lineno=None, colno=None):
        self.lineno = lineno
        self.colno = colno
        where = f" (line {lineno}, column {colno})" if lineno is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(NBoxError, ValueError):
    """Experiment is well-formed but violates the schema; ``path`` names the field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class QueryError(NBoxError):
    """A domain error raised while answering one query of an experiment."""

    def __init__(self, query, cause):
        self.query = query
        self.cause = cause
        super().__init__(f"query {query}: {type(cause).__name__}: {cause}")
