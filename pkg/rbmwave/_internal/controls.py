from functools import lru_cache as _lru_cache

import numpy as _np
import scipy.sparse as _sp
from scipy.sparse.linalg import splu as _splu

from .args import check_arg as _check_arg
from .expressions import Expression as _Expression
from .graph import MetricGraph as _MetricGraph
from .grids import TimeGrid as _TimeGrid


class ControlVector:
    """Boundary controls sampled at the times of a TimeGrid.

    Parameters
    ----------
    values : numpy.ndarray, shape (len(vertices), steps + 1)
        Row ``j`` holds the control ``u`` at ``vertices[j]``.
    tgrid : TimeGrid
    vertices : tuple of int
        Controlled vertices, ascending.

    """

    def __init__(self, values, tgrid, vertices):
        _check_arg(tgrid, 'tgrid', _TimeGrid)
        vertices = tuple(int(v) for v in vertices)
        if len(vertices) == 0:
            values = _np.zeros((0, tgrid.steps + 1))
        values = _np.array(values, dtype=float, ndmin=2)
        if values.shape != (len(vertices), tgrid.steps + 1):
            message = 'Control values need shape {}, got {}.'.format(
                (len(vertices), tgrid.steps + 1), values.shape)
            raise ValueError(message)
        if not _np.all(_np.isfinite(values)):
            raise ValueError('Control values need to be finite.')
        self.values = values
        self.tgrid = tgrid
        self.vertices = vertices

    def __repr__(self):
        return '<ControlVector at vertices {} with {} time samples>'.format(
            list(self.vertices), self.tgrid.steps + 1)

    @classmethod
    def zeros(cls, graph, tgrid):
        _check_arg(graph, 'graph', _MetricGraph)
        vertices = graph.controlled_vertices
        return cls(_np.zeros((len(vertices), tgrid.steps + 1)), tgrid, vertices)

    @classmethod
    def from_expression(cls, expression, graph, tgrid):
        """Sample the same expression in ``t`` at every controlled vertex."""
        _check_arg(expression, 'expression', _Expression)
        _check_arg(graph, 'graph', _MetricGraph)
        samples = expression(tgrid.times)
        vertices = graph.controlled_vertices
        return cls(_np.tile(samples, (len(vertices), 1)), tgrid, vertices)

    def copy(self):
        return ControlVector(self.values.copy(), self.tgrid, self.vertices)

    def with_values(self, values):
        return ControlVector(values, self.tgrid, self.vertices)


def derivative_matrices(tgrid):
    """Second-order finite difference matrices for the first and second time derivative.

    Interior rows use central differences, the first and last rows one-sided
    differences of second order.

    Returns
    -------
    d1, d2 : scipy.sparse.csr_matrix, shape (steps + 1, steps + 1)

    """
    _check_arg(tgrid, 'tgrid', _TimeGrid)
    n, h = tgrid.steps + 1, tgrid.h
    if n < 4:
        raise ValueError('The H2 norm needs at least 3 time steps, got {}.'.format(n - 1))

    # Central rows 1..n-2
    lower = _np.full(n - 1, -0.5)
    upper = _np.full(n - 1, 0.5)
    lower[-1] = upper[0] = 0.0
    d1 = _sp.diags([lower, upper], [-1, 1], shape=(n, n), format='lil')
    lower = _np.ones(n - 1)
    main = _np.full(n, -2.0)
    upper = _np.ones(n - 1)
    lower[-1] = upper[0] = main[0] = main[-1] = 0.0
    d2 = _sp.diags([lower, main, upper], [-1, 0, 1], shape=(n, n), format='lil')

    # One-sided rows 0 and n-1
    d1[0, :3] = [-1.5, 2.0, -0.5]
    d1[n - 1, n - 3:] = [0.5, -2.0, 1.5]
    d2[0, :4] = [2.0, -5.0, 4.0, -1.0]
    d2[n - 1, n - 4:] = [-1.0, 4.0, -5.0, 2.0]
    return (d1.tocsr() / h).tocsr(), (d2.tocsr() / h ** 2).tocsr()


def trapezoid_weights(tgrid):
    w = _np.full(tgrid.steps + 1, tgrid.h)
    w[0] = w[-1] = 0.5 * tgrid.h
    return w


class H2Metric:
    """Discrete H2 inner product on control samples of one TimeGrid.

    ``<a, b> = a^T G b`` with ``G = W + D1^T W D1 + D2^T W D2``, where ``W``
    holds trapezoid weights and ``D1``, ``D2`` are the difference matrices of
    :func:`derivative_matrices`. ``G`` is factorized once for the Riesz map.

    """

    def __init__(self, tgrid):
        weights = _sp.diags(trapezoid_weights(tgrid)).tocsr()
        d1, d2 = derivative_matrices(tgrid)
        self.tgrid = tgrid
        self.mass = weights
        self.gram = (weights + d1.T @ weights @ d1 + d2.T @ weights @ d2).tocsc()
        self._lu = _splu(self.gram)

    @classmethod
    def of(cls, tgrid):
        """Return the shared metric of a TimeGrid, creating it on first use.

        The metrics of the most recently used grids are kept.

        """
        _check_arg(tgrid, 'tgrid', _TimeGrid)
        return _shared_metric(tgrid)

    def apply(self, values):
        """Multiply each row of ``values`` by ``G``."""
        values = _np.atleast_2d(_np.asarray(values, dtype=float))
        return _np.asarray(self.gram @ values.T).T

    def inner(self, a, b):
        return float(_np.sum(_np.atleast_2d(a) * self.apply(b)))

    def norm(self, values):
        return float(_np.sqrt(max(self.inner(values, values), 0.0)))

    def l2_norm(self, values):
        values = _np.atleast_2d(_np.asarray(values, dtype=float))
        return float(_np.sqrt(_np.sum(values * _np.asarray(self.mass @ values.T).T)))

    def riesz(self, gradient):
        """Solve ``G r = g`` row by row."""
        gradient = _np.atleast_2d(_np.asarray(gradient, dtype=float))
        if gradient.shape[0] == 0:
            return gradient.copy()
        return self._lu.solve(_np.ascontiguousarray(gradient.T)).T

    def dual_norm(self, gradient):
        gradient = _np.atleast_2d(gradient)
        return float(_np.sqrt(max(_np.sum(gradient * self.riesz(gradient)), 0.0)))


def regularization(control, alpha):
    """Return ``alpha/2`` times the squared discrete H2 norm of a control."""
    _check_arg(control, 'control', ControlVector)
    metric = H2Metric.of(control.tgrid)
    return 0.5 * alpha * metric.inner(control.values, control.values)


@_lru_cache(maxsize=8)
def _shared_metric(tgrid):
    return H2Metric(tgrid)
