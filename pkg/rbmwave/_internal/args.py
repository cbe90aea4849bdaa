from numbers import Integral as _Integral
from numbers import Real as _Real

import numpy as _np


def check_arg(value, name, allowed_types=None, allowed_values=None, allow_none=False):
    """Check if a user-provided argument has a valid type and value.

    Parameters
    ----------
    value : any type
        Value that a user provided for an argument.
    name : str
        Name of the argument, used for proper Exception messages.
    allowed_types : type or tuple of types, optional
    allowed_values : collection of values, optional
    allow_none : bool, optional
        If True, ``value`` can be ``None`` and then no type or value checks
        are performed on it.

    Raises
    ------
    TypeError
        If the type of the given value is not contained in ``allowed_types``.
    ValueError
        If the given value is not contained in ``allowed_values``.

    """
    if allow_none and value is None:
        return
    if allowed_types is not None and not isinstance(value, allowed_types):
        if not isinstance(allowed_types, tuple):
            allowed_types = (allowed_types,)
        raise TypeError(_message(name, 'type', value.__class__.__name__, ', '.join(
            t.__name__ for t in allowed_types), 'types'))
    if allowed_values is not None and value not in allowed_values:
        raise ValueError(_message(name, 'value', value, ', '.join(
            str(v) for v in allowed_values), 'values'))


def check_positive(value, name, allow_zero=False, allow_none=False):
    """Check if a user-provided argument is a finite real number above zero."""
    if allow_none and value is None:
        return
    if isinstance(value, bool) or not isinstance(value, (_Real, _np.floating)):
        raise TypeError(_message(name, 'type', value.__class__.__name__, 'int, float',
                                 'types'))
    if not _np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = '>= 0' if allow_zero else '> 0'
        raise ValueError(_message(name, 'value', value, 'finite and ' + bound, 'values'))


def check_count(value, name, minimum=1):
    """Check if a user-provided argument is an integer not below a given minimum."""
    if isinstance(value, bool) or not isinstance(value, (_Integral, _np.integer)):
        raise TypeError(_message(name, 'type', value.__class__.__name__, 'int', 'types'))
    if value < minimum:
        raise ValueError(_message(name, 'value', value, '>= {}'.format(minimum), 'values'))


def _message(name, what, given, allowed, plural):
    return 'Argument "{}" has a wrong {}: {}\n\nAllowed {}: {}'.format(
        name, what, given, plural, allowed)
