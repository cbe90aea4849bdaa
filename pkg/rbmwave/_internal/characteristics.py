from collections import namedtuple as _namedtuple
from numbers import Integral as _Integral
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .args import check_count as _check_count
from .args import check_positive as _check_positive
from .expressions import Expression as _Expression
from .graph import MetricGraph as _MetricGraph
from .grids import TimeGrid as _TimeGrid
from .randomization import RealizationVector as _RealizationVector
from .randomization import SubsetScheme as _SubsetScheme
from .randomization import check_seed as _check_seed
from .randomization import draw_indices as _draw_indices
from .randomization import edge_probability as _edge_probability
from .randomization import variance_ch as _variance_ch
from .riemann import InitialCondition as _InitialCondition


LATTICE_POINTS = 11
MIN_SAMPLES = 1000

CharacteristicQuery = _namedtuple('CharacteristicQuery', ['edge', 'sign', 't', 'x', 's'])
CharacteristicQuery.__doc__ = """Characteristic of the ``sign`` invariant through ``(t, x)``,
evaluated at the earlier time ``s``. ``sign`` is ``"+"`` or ``"-"``.
"""

LemmaReport = _namedtuple('LemmaReport', [
    'lemma', 'h', 'samples', 'lhs_estimate', 'bound', 'margin', 'std_error',
    'fourth_moment', 'fourth_bound', 'ratio', 'passed'])
LemmaReport.__doc__ = """Result of a Monte Carlo check of a characteristic bound.

``lhs_estimate`` is the sample mean with standard error ``std_error``,
``margin = bound - lhs_estimate``. ``ratio`` compares the estimate at ``h`` and
at ``h/4`` where that applies, otherwise it is NaN.
"""

LemmaConstants = _namedtuple('LemmaConstants', ['c0', 'c1', 'c2'])


class SpeedField:
    """Piecewise constant speed on consecutive time intervals.

    Parameters
    ----------
    breakpoints : array_like
        Increasing times ``tau_0 < tau_1 < ... < tau_K``.
    values : array_like
        Speed on ``[tau_{k-1}, tau_k)`` for ``k = 1..K``.

    """

    def __init__(self, breakpoints, values):
        breakpoints = _np.asarray(breakpoints, dtype=float)
        values = _np.asarray(values, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.size < 2 or _np.any(_np.diff(breakpoints) <= 0):
            raise ValueError('Breakpoints need to be strictly increasing with at least two '
                             'entries.')
        if values.shape != (breakpoints.size - 1,):
            raise ValueError('Need {} speed values, got {}.'.format(
                breakpoints.size - 1, values.shape))
        if _np.any(values < 0) or not _np.all(_np.isfinite(values)):
            raise ValueError('Speeds need to be finite and >= 0.')
        self.breakpoints = breakpoints
        self.values = values
        self.cumulative = _np.concatenate([[0.0], _np.cumsum(values * _np.diff(breakpoints))])

    @classmethod
    def constant(cls, speed, horizon):
        return cls([0.0, horizon], [speed])

    def antiderivative(self, t):
        """Integral of the speed from the first breakpoint to ``t``."""
        self._check_time(t)
        return float(_np.interp(t, self.breakpoints, self.cumulative))

    def integral(self, s, t):
        """Integral of the speed over ``[s, t]``."""
        return self.antiderivative(t) - self.antiderivative(s)

    def last_time_below(self, level, t):
        """Largest time ``s <= t`` with ``antiderivative(s) <= level``, or ``None``."""
        if self.antiderivative(self.breakpoints[0]) > level:
            return None
        if self.antiderivative(t) <= level:
            return t
        j = int(_np.searchsorted(self.cumulative, level, side='right')) - 1
        # The speed on interval j is positive because cumulative[j+1] > level
        s = self.breakpoints[j] + (level - self.cumulative[j]) / self.values[j]
        return float(min(s, t))

    def _check_time(self, t):
        tol = 1e-12 * max(1.0, abs(self.breakpoints[-1]))
        if t < self.breakpoints[0] - tol or t > self.breakpoints[-1] + tol:
            message = 'Time {} is outside of the field range [{}, {}].'.format(
                t, self.breakpoints[0], self.breakpoints[-1])
            raise ValueError(message)


def randomized_field(scheme, realization, tgrid, edge, speed):
    """Speed field of one edge along a realization: ``speed/pi`` when active, else 0."""
    _check_arg(scheme, 'scheme', _SubsetScheme)
    _check_arg(realization, 'realization', _RealizationVector)
    _check_arg(tgrid, 'tgrid', _TimeGrid)
    if len(realization.indices) != tgrid.steps:
        raise ValueError('The realization has {} indices but the time grid has {} steps.'.format(
            len(realization.indices), tgrid.steps))
    active = scheme.membership([edge])[:, 0]
    scale = speed / _edge_probability(scheme, edge)
    values = _np.where(active[_np.asarray(realization.indices) - 1], scale, 0.0)
    return SpeedField(tgrid.times, values)


def xi_deterministic(query, speed):
    """Foot of the characteristic at time ``s``.

    It is ``x - c(t-s)`` for ``+`` and ``x + c(t-s)`` for ``-``. The result may lie
    outside of the edge.

    """
    _check_query(query)
    _check_positive(speed, 'speed')
    distance = speed * (query.t - query.s)
    return query.x - distance if query.sign == '+' else query.x + distance


def xi_randomized(query, scheme, realization, tgrid, speed):
    """Foot of the characteristic at time ``s`` under the randomized speed of the edge."""
    _check_query(query)
    field = randomized_field(scheme, realization, tgrid, query.edge, speed)
    return xi_field(query, field)


def xi_field(query, field):
    """Foot of the characteristic at time ``s`` for a given SpeedField."""
    _check_query(query)
    _check_arg(field, 'field', SpeedField)
    distance = field.integral(query.s, query.t)
    return query.x - distance if query.sign == '+' else query.x + distance


def exit_time(query, field, length, floor=None):
    """Largest time at which the backward characteristic through ``(t, x)`` leaves the edge.

    Parameters
    ----------
    query : CharacteristicQuery
        Only ``sign``, ``t`` and ``x`` are used.
    field : float or SpeedField
        Constant speed or piecewise constant speed field.
    length : float
        Length of the edge.
    floor : float, optional
        If given, ``max(exit, floor)`` is returned, and ``floor`` if there is no exit.

    Returns
    -------
    time : float or None
        ``None`` if the characteristic stays inside the edge on ``[0, t]``.

    """
    _check_query(query)
    _check_positive(length, 'length')
    if isinstance(field, _Real) and not isinstance(field, bool):
        _check_positive(field, 'field', allow_zero=True)
        field = SpeedField.constant(float(field), max(query.t, 1e-300))
    _check_arg(field, 'field', SpeedField)
    distance = query.x if query.sign == '+' else length - query.x
    if query.t == 0.0:
        s = 0.0 if distance <= 0.0 else None
    else:
        s = field.last_time_below(field.antiderivative(query.t) - distance, query.t)
    if floor is None:
        return s
    return float(floor) if s is None else max(s, float(floor))


def lemma_constants(scheme, graph):
    """Constants of the moment bounds for randomized characteristics.

    Returns
    -------
    constants : LemmaConstants
        ``c0 = max_e c_e * max(1, (1-pi_e)/pi_e)``, ``c1 = 3 * c0**2 * max_e Var[c_h,e]``
        and ``c2 = 1.5 * sqrt(2*c1) / min_e c_e**2``.

    """
    _check_arg(scheme, 'scheme', _SubsetScheme)
    _check_arg(graph, 'graph', _MetricGraph)
    scheme.check_graph(graph)
    c0 = 0.0
    variance = 0.0
    for e in graph.edges:
        pi = _edge_probability(scheme, e.id)
        c0 = max(c0, e.speed * max(1.0, abs((pi - 1.0) / pi)))
        variance = max(variance, _variance_ch(scheme, e.id, e.speed))
    c1 = 3.0 * c0 ** 2 * variance
    c2 = 1.5 * _np.sqrt(2.0 * c1) / min(e.speed for e in graph.edges) ** 2
    return LemmaConstants(float(c0), float(c1), float(c2))


def characteristic_lipschitz(scheme, graph):
    """Largest randomized speed ``max_e c_e / pi_e``, a Lipschitz constant of every path."""
    _check_arg(graph, 'graph', _MetricGraph)
    scheme.check_graph(graph)
    return float(max(e.speed / _edge_probability(scheme, e.id) for e in graph.edges))


def validate_lemma41(scheme, edge, speed, s, t, h, samples, seed, length=1.0, graph=None,
                     verbose=False):
    """Check the mean square deviation of randomized from deterministic characteristics.

    Draws ``samples`` independent realizations on a grid of step ``h`` aligned with
    ``[s, t]`` and estimates ``E[sup_x |xi_h(s;t,x) - xi(s;t,x)|**2]``, which has to
    stay below ``h * (t-s) * Var[c_h]``. The supremum is taken on a lattice of
    interior points of the edge. The fourth moment is reported against
    ``c1 * h**2 * (t-s)**2``.

    Parameters
    ----------
    scheme : SubsetScheme
    edge : int
    speed : float
    s, t : float
        Times with ``0 <= s < t`` such that ``(t-s)/h`` is an integer.
    h : float
    samples : int
        Number of realizations, at least 1000.
    seed : int
    length : float
        Edge length used for the lattice.
    graph : MetricGraph, optional
        If given, ``c1`` is computed over all edges, otherwise from this edge alone.
    verbose : bool

    Returns
    -------
    report : LemmaReport

    """
    # Argument processing
    _check_arg(scheme, 'scheme', _SubsetScheme)
    _check_arg(edge, 'edge', _Integral)
    _check_positive(speed, 'speed')
    _check_times(s, t)
    _check_positive(h, 'h')
    _check_count(samples, 'samples', minimum=MIN_SAMPLES)
    _check_seed(seed)
    steps = _aligned_steps(t - s, h)

    # Integral of the randomized speed minus the deterministic one, per sample
    pi = _edge_probability(scheme, edge)
    active = scheme.membership([edge])[:, 0]
    rng = _np.random.default_rng(seed)
    indices = _draw_indices(scheme, rng.random((samples, steps)))
    randomized_integral = h * (speed / pi) * active[indices - 1].sum(axis=1)
    deviation = randomized_integral - speed * (t - s)

    # The deviation does not depend on x
    lattice = _np.linspace(0.0, length, LATTICE_POINTS + 2)[1:-1]
    xi_h = lattice[None, :] - randomized_integral[:, None]
    xi = lattice - speed * (t - s)
    squared = _np.max((xi_h - xi[None, :]) ** 2, axis=1)

    # Statistics
    variance = _variance_ch(scheme, edge, speed)
    bound = h * (t - s) * variance
    lhs, std_error = _mean_and_error(squared)
    constants = lemma_constants(scheme, graph) if graph is not None else \
        _edge_constants(scheme, edge, speed)
    fourth = float(_np.mean(deviation ** 4))
    report = LemmaReport(
        'mean-square', float(h), int(samples), lhs, float(bound), float(bound - lhs),
        std_error, fourth, float(constants.c1 * h ** 2 * (t - s) ** 2), float('nan'),
        bool(lhs <= bound + 3.0 * std_error))
    if verbose:
        print('Done. Mean square deviation {:.4e} against bound {:.4e} for edge {} '
              'at h={}.'.format(lhs, bound, edge, h))
    return report


def validate_lemma42(scheme, edge, speed, t_floor, t, h, samples, seed, length=1.0, sign='+',
                     graph=None, verbose=False):
    """Check that the mean square deviation of clamped exit times scales linearly in ``h``.

    Estimates ``E[sup_x |max(t_h,in, t') - max(t_in, t')|**2]`` at ``h`` and at
    ``h/4`` with independent draws. The check passes if the ratio of the two
    estimates is at least 2 within three standard errors.

    Parameters
    ----------
    t_floor : float
        Lower clamp ``t'`` with ``0 <= t' < t``.
    length : float
        Edge length.
    sign : str
        ``"+"`` or ``"-"``.

    Other parameters are as in :func:`validate_lemma41`. ``t/h`` needs to be an
    integer.

    Returns
    -------
    report : LemmaReport
        Estimates and bound refer to step ``h``; ``ratio`` is the estimate at ``h``
        divided by the estimate at ``h/4``.

    """
    # Argument processing
    _check_arg(scheme, 'scheme', _SubsetScheme)
    _check_arg(edge, 'edge', _Integral)
    _check_arg(sign, 'sign', str, ['+', '-'])
    _check_positive(speed, 'speed')
    _check_positive(length, 'length')
    _check_times(t_floor, t)
    _check_positive(h, 'h')
    _check_count(samples, 'samples', minimum=MIN_SAMPLES)
    _check_seed(seed)

    rng = _np.random.default_rng(seed)
    coarse = _exit_time_deviation(scheme, edge, speed, t_floor, t, h, samples, rng, length,
                                  sign)
    fine = _exit_time_deviation(scheme, edge, speed, t_floor, t, h / 4.0, samples, rng,
                                length, sign)
    lhs, std_error = _mean_and_error(coarse)
    lhs_fine, std_error_fine = _mean_and_error(fine)

    if lhs == 0.0 and lhs_fine == 0.0:
        ratio, passed = float('nan'), True
    elif lhs_fine == 0.0:
        ratio, passed = float('inf'), True
    else:
        ratio = lhs / lhs_fine
        relative = _np.hypot(std_error / lhs if lhs else 0.0, std_error_fine / lhs_fine)
        passed = bool(ratio + 3.0 * ratio * relative >= 2.0)

    constants = lemma_constants(scheme, graph) if graph is not None else \
        _edge_constants(scheme, edge, speed)
    bound = constants.c2 * h * (t - t_floor)
    report = LemmaReport(
        'exit-time', float(h), int(samples), lhs, float(bound), float(bound - lhs), std_error,
        float('nan'), float('nan'), float(ratio), bool(passed))
    if verbose:
        print('Done. Exit time deviation {:.4e} at h={} and {:.4e} at h={} for edge {}.'.format(
            lhs, h, lhs_fine, h / 4.0, edge))
    return report


def _exit_time_deviation(scheme, edge, speed, t_floor, t, h, samples, rng, length, sign):
    steps = _aligned_steps(t, h)
    pi = _edge_probability(scheme, edge)
    active = scheme.membership([edge])[:, 0]
    indices = _draw_indices(scheme, rng.random((samples, steps)))
    values = _np.where(active[indices - 1], speed / pi, 0.0)
    cumulative = _np.concatenate([_np.zeros((samples, 1)), h * _np.cumsum(values, axis=1)],
                                 axis=1)
    knots = h * _np.arange(steps + 1)
    rows = _np.arange(samples)

    lattice = _np.linspace(0.0, length, LATTICE_POINTS + 2)[1:-1]
    worst = _np.zeros(samples)
    for x in lattice:
        distance = x if sign == '+' else length - x
        deterministic = t - distance / speed
        deterministic = max(deterministic, t_floor) if deterministic >= 0.0 else t_floor

        # Largest s with F(s) <= F(t) - distance, per sample
        level = cumulative[:, -1] - distance
        count = _np.sum(cumulative <= level[:, None], axis=1)
        j = _np.clip(count - 1, 0, steps - 1)
        slope = values[rows, j]
        with _np.errstate(divide='ignore', invalid='ignore'):
            s = knots[j] + _np.where(slope > 0, (level - cumulative[rows, j]) / slope, 0.0)
        s = _np.minimum(s, t)
        randomized = _np.where(count > 0, _np.maximum(s, t_floor), t_floor)
        worst = _np.maximum(worst, (randomized - deterministic) ** 2)
    return worst


def dalembert_single_edge(initial, speed, length, t, x, control_start=None, control_end=None):
    """Exact Riemann invariants on a single edge with two degree-1 vertices.

    The characteristic through ``(t, x)`` is traced backwards through boundary
    reflections until it reaches the initial time. At a degree-1 vertex the
    entering invariant equals the leaving one plus ``2*u/c``.

    Parameters
    ----------
    initial : InitialCondition
        Initial displacement and velocity as expressions in ``x``. The displacement
        needs a closed form derivative.
    speed : float
    length : float
    t : float
        Time, >= 0.
    x : float or array_like
        Positions in ``[0, length]``.
    control_start, control_end : Expression, optional
        Controls ``u`` in ``t`` at the vertices ``x=0`` and ``x=length``.

    Returns
    -------
    w_minus, w_plus : float or numpy.ndarray

    """
    # Argument processing
    _check_arg(initial, 'initial', _InitialCondition)
    _check_positive(speed, 'speed')
    _check_positive(length, 'length')
    _check_arg(t, 't', _Real)
    if t < 0:
        raise ValueError('Argument "t" has a wrong value: {}\n\nAllowed values: >= 0'.format(t))
    _check_arg(control_start, 'control_start', _Expression, allow_none=True)
    _check_arg(control_end, 'control_end', _Expression, allow_none=True)
    if not initial.y0.is_analytic:
        raise ValueError('The initial displacement needs a closed form derivative.')

    def w_minus0(position):
        return float(initial.y1(position) + speed * initial.y0.derivative(position))

    def w_plus0(position):
        return float(initial.y1(position) - speed * initial.y0.derivative(position))

    def boundary(control, time):
        return 0.0 if control is None else 2.0 * float(control(time)) / speed

    def trace(sign, time, position):
        total = 0.0
        while True:
            if sign == '+':
                foot = position - speed * time
                if foot >= 0.0:
                    return total + w_plus0(foot)
                time -= position / speed
                position = 0.0
                total += boundary(control_start, time)
                sign = '-'
            else:
                foot = position + speed * time
                if foot <= length:
                    return total + w_minus0(foot)
                time -= (length - position) / speed
                position = length
                total += boundary(control_end, time)
                sign = '+'

    positions = _np.asarray(x, dtype=float)
    if _np.any(positions < 0.0) or _np.any(positions > length):
        raise ValueError('Positions need to be in [0, {}].'.format(length))
    w_minus = _np.array([trace('-', float(t), p) for p in positions.ravel()])
    w_plus = _np.array([trace('+', float(t), p) for p in positions.ravel()])
    if positions.ndim == 0:
        return float(w_minus[0]), float(w_plus[0])
    return w_minus.reshape(positions.shape), w_plus.reshape(positions.shape)


def _edge_constants(scheme, edge, speed):
    pi = _edge_probability(scheme, edge)
    c0 = speed * max(1.0, abs((pi - 1.0) / pi))
    c1 = 3.0 * c0 ** 2 * _variance_ch(scheme, edge, speed)
    return LemmaConstants(c0, c1, 1.5 * _np.sqrt(2.0 * c1) / speed ** 2)


def _mean_and_error(values):
    mean = float(_np.mean(values))
    error = float(_np.std(values, ddof=1) / _np.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, error


def _aligned_steps(duration, h):
    steps = int(round(duration / h))
    if steps < 1 or abs(steps * h - duration) > 1e-9 * max(1.0, duration):
        raise ValueError('The time span {} is not an integer multiple of h={}.'.format(
            duration, h))
    return steps


def _check_times(s, t):
    _check_arg(s, 's', _Real)
    _check_arg(t, 't', _Real)
    if not 0.0 <= s < t:
        raise ValueError('Times need to satisfy 0 <= s < t, got s={} and t={}.'.format(s, t))


def _check_query(query):
    _check_arg(query, 'query', CharacteristicQuery)
    _check_arg(query.sign, 'query.sign', str, ['+', '-'])
    if not 0.0 <= query.s <= query.t:
        raise ValueError('A query needs 0 <= s <= t, got s={} and t={}.'.format(
            query.s, query.t))
