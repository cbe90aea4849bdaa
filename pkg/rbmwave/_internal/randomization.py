from collections import namedtuple as _namedtuple
from numbers import Integral as _Integral
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .args import check_count as _check_count
from .errors import SchemeError as _SchemeError
from .graph import MetricGraph as _MetricGraph


PROBABILITY_TOLERANCE = 1e-12
SEED_LIMIT = 2 ** 64


EdgeProbabilities = _namedtuple('EdgeProbabilities', ['pi', 'var_ch'])
EdgeProbabilities.__doc__ = """Inclusion probability and speed variance of every edge.

Both fields map an edge id to a float. ``var_ch`` is the variance of the
randomized speed in units of speed squared.
"""

RealizationVector = _namedtuple('RealizationVector', ['indices', 'seed'])
RealizationVector.__doc__ = """Sequence of selected subset indices, one per time interval.

``indices`` is an integer array of 1-based subset indices. ``seed`` is the
seed it was drawn with, or ``None`` if the indices were given explicitly.
"""


class SubsetScheme:
    """Collection of active-edge subsets and the probabilities to select them.

    Parameters
    ----------
    subsets : list of list of int
        Edge ids of each subset. The order fixes the 1-based subset indices.
    probabilities : list of float
        Selection probability of each subset, nonnegative and summing to one.

    Raises
    ------
    SchemeError
        If the lengths differ, a probability is negative or not finite, the
        probabilities do not sum to one or a subset is empty.

    """

    def __init__(self, subsets, probabilities):
        # Argument processing
        _check_arg(subsets, 'subsets', (list, tuple))
        _check_arg(probabilities, 'probabilities', (list, tuple, _np.ndarray))
        if len(subsets) == 0:
            raise _SchemeError('A subset scheme needs at least one subset.')
        if len(subsets) != len(probabilities):
            message = 'Got {} subsets but {} probabilities.'.format(
                len(subsets), len(probabilities))
            raise _SchemeError(message)

        # Subsets
        frozen = []
        for number, subset in enumerate(subsets, 1):
            if isinstance(subset, (str, bytes)) or not hasattr(subset, '__iter__'):
                raise _SchemeError('Subset {} is not a collection of edge ids.'.format(number))
            members = list(subset)
            for edge in members:
                if isinstance(edge, bool) or not isinstance(edge, _Integral) or edge < 1:
                    message = 'Subset {} contains an invalid edge id {!r}.'.format(number, edge)
                    raise _SchemeError(message)
            if not members:
                raise _SchemeError('Subset {} is empty.'.format(number))
            frozen.append(frozenset(int(e) for e in members))

        # Probabilities
        for number, p in enumerate(probabilities, 1):
            if isinstance(p, bool) or not isinstance(p, (_Real, _np.floating)):
                raise _SchemeError('Probability {} is not a number: {!r}'.format(number, p))
        p = _np.array(probabilities, dtype=float)
        if not _np.all(_np.isfinite(p)) or _np.any(p < 0):
            raise _SchemeError('Probabilities need to be finite and >= 0, got {}.'.format(
                p.tolist()))
        total = p.sum()
        if abs(total - 1.0) > PROBABILITY_TOLERANCE * max(1, len(p)):
            message = 'Probabilities need to satisfy sum(p) = 1, got sum(p) = {!r}.'.format(
                float(total))
            raise _SchemeError(message)
        p.setflags(write=False)

        self._subsets = tuple(frozen)
        self._probabilities = p
        self._cdf = _cumulative(p)

    def __len__(self):
        return len(self._subsets)

    def __repr__(self):
        return '<SubsetScheme with {} subsets>'.format(len(self._subsets))

    @property
    def subsets(self):
        return self._subsets

    @property
    def probabilities(self):
        return self._probabilities

    @property
    def edges(self):
        """Ids of all edges that appear in some subset, ascending."""
        return tuple(sorted(set().union(*self._subsets)))

    def subset(self, index):
        """Return the edge ids of the subset with the given 1-based index."""
        _check_subset_index(self, index)
        return self._subsets[index - 1]

    def membership(self, edge_ids):
        """Return a boolean matrix whose entry ``[w, i]`` tells if edge ``edge_ids[i]`` is in
        subset ``w+1``."""
        return _np.array([[e in subset for e in edge_ids] for subset in self._subsets],
                         dtype=bool)

    def check_graph(self, graph):
        """Check that the scheme fits a graph and every edge has a positive probability.

        Raises
        ------
        SchemeError
            If a subset refers to an edge that the graph does not have, or an edge of
            the graph is never selected.

        """
        _check_arg(graph, 'graph', _MetricGraph)
        valid = set(graph.edge_ids)
        for number, subset in enumerate(self._subsets, 1):
            unknown = sorted(subset - valid)
            if unknown:
                message = 'Subset {} contains edges {} that are not in the graph.'.format(
                    number, unknown)
                raise _SchemeError(message)
        for edge in graph.edge_ids:
            edge_probability(self, edge)


def full_scheme(graph):
    """Create the degenerate scheme with one subset holding all edges, selected always."""
    _check_arg(graph, 'graph', _MetricGraph)
    return SubsetScheme([list(graph.edge_ids)], [1.0])


def edge_probability(scheme, edge):
    """Calculate the probability that an edge is active in a time interval.

    Parameters
    ----------
    scheme : SubsetScheme
    edge : int

    Returns
    -------
    pi : float
        Sum of the probabilities of all subsets that contain the edge.

    Raises
    ------
    SchemeError
        If the edge is never selected, i.e. ``pi == 0``.

    """
    _check_arg(scheme, 'scheme', SubsetScheme)
    _check_arg(edge, 'edge', _Integral)
    pi = 0.0
    for subset, p in zip(scheme.subsets, scheme.probabilities):
        if edge in subset:
            pi += p
    if pi <= 0.0:
        message = ('Edge {} is never selected by the scheme. Every edge needs a '
                   'positive inclusion probability.'.format(edge))
        raise _SchemeError(message)
    return float(min(pi, 1.0))


def variance_ch(scheme, edge, speed, method='enumerate'):
    """Calculate the variance of the randomized speed of an edge.

    Parameters
    ----------
    scheme : SubsetScheme
    edge : int
    speed : float
        Original wave speed of the edge.
    method : str
        Possible values:

        - ``"enumerate"``: sum over all subsets of ``p * (c*chi/pi - c)**2``
        - ``"closed"``: closed form ``c**2 * (1/pi - 1)``

    Returns
    -------
    variance : float

    """
    _check_arg(method, 'method', str, ['enumerate', 'closed'])
    _check_arg(speed, 'speed', _Real)
    pi = edge_probability(scheme, edge)
    if method == 'closed':
        return float(speed ** 2 * (1.0 / pi - 1.0))
    total = 0.0
    for subset, p in zip(scheme.subsets, scheme.probabilities):
        chi = 1.0 if edge in subset else 0.0
        total += p * (chi / pi - 1.0) ** 2
    return float(speed ** 2 * total)


def edge_probabilities(scheme, graph):
    """Collect inclusion probabilities and speed variances for all edges of a graph."""
    scheme.check_graph(graph)
    pi = {}
    var_ch = {}
    for e in graph.edges:
        pi[e.id] = edge_probability(scheme, e.id)
        var_ch[e.id] = 0.0 if pi[e.id] == 1.0 else variance_ch(scheme, e.id, e.speed)
    return EdgeProbabilities(pi, var_ch)


def randomized_speed(scheme, edge, speed, subset_index):
    """Return the speed of an edge while a given subset is active.

    The speed is ``speed / pi`` if the edge belongs to the subset and 0 otherwise,
    so that its expectation over the subsets is the original speed.

    """
    _check_subset_index(scheme, subset_index)
    if edge not in scheme.subsets[subset_index - 1]:
        return 0.0
    return float(speed / edge_probability(scheme, edge))


def pattern_speeds(scheme, graph, subset_index):
    """Return the randomized speeds of all edges, ordered by edge id, for one subset."""
    _check_subset_index(scheme, subset_index)
    subset = scheme.subsets[subset_index - 1]
    return tuple(
        float(e.speed / edge_probability(scheme, e.id)) if e.id in subset else 0.0
        for e in graph.edges)


def mean_speed_check(scheme, edge, speed):
    """Return the expectation of the randomized speed, which has to equal ``speed``."""
    total = 0.0
    for index, p in enumerate(scheme.probabilities, 1):
        total += p * randomized_speed(scheme, edge, speed, index)
    return float(total)


def sample_realization(scheme, steps, seed):
    """Draw one subset index per time interval.

    Parameters
    ----------
    scheme : SubsetScheme
    steps : int
        Number of time intervals K.
    seed : int
        Seed in ``[0, 2**64)`` for NumPy's default bit generator PCG64.

    Returns
    -------
    realization : RealizationVector

    Note
    ----
    Each index is drawn by inverting the cumulative distribution of the ordered
    subset probabilities at a uniform variate. The result is a pure function of
    ``(scheme, steps, seed)``.

    """
    # Argument processing
    _check_arg(scheme, 'scheme', SubsetScheme)
    _check_count(steps, 'steps', minimum=1)
    check_seed(seed)

    # Inverse CDF sampling
    rng = _np.random.default_rng(seed)
    uniforms = rng.random(steps)
    indices = draw_indices(scheme, uniforms)
    indices.setflags(write=False)
    return RealizationVector(indices, int(seed))


def draw_indices(scheme, uniforms):
    """Map uniform variates in [0, 1) to 1-based subset indices, any array shape."""
    return _np.searchsorted(scheme._cdf, uniforms, side='right').astype(_np.int64) + 1


def realization_from_indices(scheme, indices):
    """Build a realization from a given sequence of 1-based subset indices."""
    _check_arg(scheme, 'scheme', SubsetScheme)
    values = _np.array(indices, dtype=_np.int64).ravel()
    if values.size == 0:
        raise ValueError('A realization needs at least one subset index.')
    if _np.any(values < 1) or _np.any(values > len(scheme)):
        message = 'Subset indices need to be in 1..{}, got {}.'.format(
            len(scheme), sorted(set(values.tolist()) - set(range(1, len(scheme) + 1))))
        raise ValueError(message)
    values.setflags(write=False)
    return RealizationVector(values, None)


def check_seed(seed):
    """Check that a seed is an integer in [0, 2**64)."""
    if isinstance(seed, bool) or not isinstance(seed, _Integral):
        raise TypeError('Argument "seed" has a wrong type: {}\n\nAllowed types: int'.format(
            seed.__class__.__name__))
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError('Argument "seed" has a wrong value: {}\n\n'
                         'Allowed values: 0 <= seed < 2**64'.format(seed))


def _check_subset_index(scheme, index):
    if isinstance(index, bool) or not isinstance(index, (_Integral, _np.integer)) \
            or not 1 <= index <= len(scheme):
        raise ValueError('Subset index {!r} is not in 1..{}.'.format(index, len(scheme)))


def _cumulative(probabilities):
    cdf = _np.cumsum(probabilities)
    # The last bin has to catch every variate below 1 despite rounding
    last = _np.flatnonzero(probabilities > 0)[-1]
    cdf[last:] = 1.0
    cdf.setflags(write=False)
    return cdf
