"""Exceptions raised by the solver when inputs are structurally wrong or a solve fails.

Each class derives from a builtin exception, so that callers who only know about
``ValueError`` or ``RuntimeError`` still catch them.

"""


class StructureError(ValueError):
    """A metric graph or a vertex/edge reference is structurally invalid."""


class SchemeError(ValueError):
    """A subset scheme violates the probability requirements."""


class ConfigError(ValueError):
    """A network or experiment document does not follow the schema.

    Parameters
    ----------
    message : str
    field : str, optional
        Path of the offending field, e.g. ``edges[3].length``.
    line : int, optional
        Line number in the document, if known.

    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        parts = []
        if line is not None:
            parts.append('line {}'.format(line))
        if field is not None:
            parts.append('field "{}"'.format(field))
        if parts:
            message = '{}: {}'.format(', '.join(parts), message)
        super().__init__(message)


class SolverError(RuntimeError):
    """A linear solve, a time step or an optimization run failed."""


class UndefinedRelativeError(ArithmeticError):
    """A relative error was requested with respect to a reference of norm zero."""
