"""Named scalar expressions used for controls, targets and initial data."""

from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .errors import ConfigError as _ConfigError


KINDS = ('zero', 'constant', 'sin', 'samples')
VARIABLES = ('t', 'x')


class Expression:
    """Scalar function of one variable, either time ``t`` or edge position ``x``.

    Parameters
    ----------
    kind : str
        Possible values:

        - ``"zero"``: f = 0
        - ``"constant"``: f = value
        - ``"sin"``: f = amplitude * sin(omega * arg + phase), usually created
          with :func:`sin`
        - ``"samples"``: piecewise linear interpolation of ``values`` on a uniform
          grid over ``span``
    variable : str
        ``"t"`` or ``"x"``.

    """

    def __init__(self, kind, variable='t', value=0.0, amplitude=1.0, omega=1.0, phase=0.0,
                 values=None, span=None):
        _check_arg(kind, 'kind', str, KINDS)
        _check_arg(variable, 'variable', str, VARIABLES)
        self.kind = kind
        self.variable = variable
        self.value = float(value)
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)
        if kind == 'samples':
            values = _np.asarray(values, dtype=float)
            if values.ndim != 1 or values.size < 2:
                raise ValueError('Sampled expressions need at least two values.')
            if span is None or len(span) != 2 or not span[1] > span[0]:
                raise ValueError('Sampled expressions need a span (a, b) with a < b.')
            self.values = values
            self.span = (float(span[0]), float(span[1]))
        else:
            self.values = None
            self.span = None

    def __repr__(self):
        if self.kind == 'zero':
            return 'Expression(zero)'
        if self.kind == 'constant':
            return 'Expression(constant {})'.format(self.value)
        if self.kind == 'sin':
            return 'Expression({} * sin({} * {} + {}))'.format(
                self.amplitude, self.omega, self.variable, self.phase)
        return 'Expression({} samples on {})'.format(self.values.size, self.span)

    def __call__(self, arg):
        arg = _np.asarray(arg, dtype=float)
        if self.kind == 'zero':
            return _np.zeros_like(arg)
        if self.kind == 'constant':
            return _np.full_like(arg, self.value)
        if self.kind == 'sin':
            return self.amplitude * _np.sin(self.omega * arg + self.phase)
        grid = _np.linspace(self.span[0], self.span[1], self.values.size)
        return _np.interp(arg, grid, self.values)

    @property
    def is_analytic(self):
        """True if derivatives are available in closed form."""
        return self.kind != 'samples'

    def derivative(self, arg, order=1):
        """Evaluate a derivative in closed form, or return ``None`` for sampled data."""
        arg = _np.asarray(arg, dtype=float)
        if self.kind in ('zero', 'constant'):
            return _np.zeros_like(arg)
        if self.kind == 'sin':
            # d^k/da^k sin(w a + p) = w^k sin(w a + p + k pi/2)
            factor = self.amplitude * self.omega ** order
            return factor * _np.sin(self.omega * arg + self.phase + order * _np.pi / 2)
        return None


def zero(variable='t'):
    return Expression('zero', variable)


def constant(value, variable='t'):
    return Expression('constant', variable, value=value)


def sin(amplitude=1.0, frequency=1.0, phase=0.0, frequency_pi=0, variable='t'):
    """Create ``amplitude * sin(frequency * pi**frequency_pi * arg + phase)``.

    For example ``sin(frequency=4, frequency_pi=1)`` is ``sin(4*pi*t)``.

    """
    omega = float(frequency) * _np.pi ** frequency_pi
    return Expression('sin', variable, amplitude=amplitude, omega=omega, phase=phase)


def parse_expression(document, field='expression', variable='t'):
    """Create an Expression from its JSON representation.

    Accepted forms are ``"zero"``, a number, or an object with a ``kind`` key.

    Raises
    ------
    ConfigError
        If the document is not a valid expression. The message names ``field``.

    """
    if isinstance(document, Expression):
        return document
    if document == 'zero' or document is None:
        return zero(variable)
    if isinstance(document, _Real) and not isinstance(document, bool):
        return constant(document, variable)
    if not isinstance(document, dict):
        raise _ConfigError('Expected "zero", a number or an object with "kind", got {!r}.'.format(
            document), field=field)
    variable = document.get('variable', variable)
    if variable not in VARIABLES:
        raise _ConfigError('Unknown variable {!r}, allowed are {}.'.format(
            variable, ', '.join(VARIABLES)), field='{}.variable'.format(field))
    kind = document.get('kind')
    allowed = {
        'zero': set(),
        'constant': {'value'},
        'sin': {'amplitude', 'frequency', 'frequency_pi', 'phase'},
        'samples': {'values', 'span'},
    }
    if kind not in allowed:
        raise _ConfigError('Unknown kind {!r}, allowed are {}.'.format(
            kind, ', '.join(KINDS)), field='{}.kind'.format(field))
    unknown = set(document) - allowed[kind] - {'kind', 'variable'}
    if unknown:
        raise _ConfigError('Unknown keys {} for kind "{}".'.format(sorted(unknown), kind),
                           field=field)
    for key in allowed[kind] - {'values', 'span'}:
        if key in document and (isinstance(document[key], bool)
                                or not isinstance(document[key], _Real)):
            raise _ConfigError('Expected a number, got {!r}.'.format(document[key]),
                               field='{}.{}'.format(field, key))
    if kind == 'zero':
        return zero(variable)
    if kind == 'constant':
        if 'value' not in document:
            raise _ConfigError('Missing key "value".', field=field)
        return constant(document['value'], variable)
    if kind == 'sin':
        return sin(document.get('amplitude', 1.0), document.get('frequency', 1.0),
                   document.get('phase', 0.0), document.get('frequency_pi', 0), variable)
    try:
        return Expression('samples', variable, values=document.get('values'),
                          span=document.get('span'))
    except (TypeError, ValueError) as excp:
        raise _ConfigError(str(excp), field=field) from None
