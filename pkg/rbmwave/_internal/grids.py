from collections import namedtuple as _namedtuple
from math import ceil as _ceil
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .args import check_positive as _check_positive
from .graph import MetricGraph as _MetricGraph


class EdgeGrid(_namedtuple('EdgeGrid', ['edge', 'length', 'points', 'dx'])):
    """Uniform spatial grid on one edge, including both endpoints."""

    __slots__ = ()

    @property
    def x(self):
        return _np.linspace(0.0, self.length, self.points)

    @property
    def weights(self):
        """Trapezoid quadrature weights of the grid nodes."""
        w = _np.full(self.points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


class TimeGrid(_namedtuple('TimeGrid', ['horizon', 'steps', 'h'])):
    """Uniform time grid ``t_n = n*h`` for ``n = 0, ..., steps``."""

    __slots__ = ()

    @property
    def times(self):
        return self.h * _np.arange(self.steps + 1)


def build_grids(graph, max_dx):
    """Create a uniform grid on every edge with a spacing of at most ``max_dx``.

    Parameters
    ----------
    graph : MetricGraph
    max_dx : float

    Returns
    -------
    grids : dict
        Maps edge id to EdgeGrid, in ascending edge id.

    """
    # Argument processing
    _check_arg(graph, 'graph', _MetricGraph)
    _check_positive(max_dx, 'max_dx')

    # Grid sizes, with a small slack so that lengths divisible by max_dx are not refined
    grids = {}
    for e in graph.edges:
        intervals = max(1, _ceil(e.length / max_dx - 1e-9))
        grids[e.id] = EdgeGrid(e.id, e.length, intervals + 1, e.length / intervals)
    return grids


def build_time_grid(horizon, h):
    """Create a uniform time grid over ``[0, horizon]`` with step ``h``.

    Raises
    ------
    ValueError
        If ``horizon / h`` is not an integer up to rounding.

    """
    _check_positive(horizon, 'horizon')
    _check_positive(h, 'h')
    steps = int(round(horizon / h))
    if steps < 1 or abs(steps * h - horizon) > 1e-9 * max(1.0, horizon):
        message = 'The horizon {} is not an integer multiple of the step size {}.'.format(
            horizon, h)
        raise ValueError(message)
    return TimeGrid(float(horizon), steps, horizon / steps)


class StateLayout:
    """Position of every Riemann invariant value in the flat state vector.

    Each edge occupies a contiguous block ``[w_minus (N values), w_plus (N values)]``
    where ``N`` is the number of grid points of the edge. The reconstructed
    displacement uses one value per grid node, edges concatenated in id order.

    """

    def __init__(self, graph, grids):
        _check_arg(graph, 'graph', _MetricGraph)
        _check_arg(grids, 'grids', dict)
        if sorted(grids) != list(graph.edge_ids):
            raise ValueError('Grids need to be given for exactly the edges {}.'.format(
                list(graph.edge_ids)))
        self.edge_ids = graph.edge_ids
        self.grids = {edge: grids[edge] for edge in self.edge_ids}
        self.offsets = {}
        offset = 0
        node_count = 0
        for edge in self.edge_ids:
            self.offsets[edge] = offset
            offset += 2 * self.grids[edge].points
            node_count += self.grids[edge].points
        self.size = offset
        self.node_count = node_count

        # Index maps from displacement nodes to state entries
        self.minus_index = _np.concatenate([
            _np.arange(self.offsets[e], self.offsets[e] + self.grids[e].points)
            for e in self.edge_ids])
        self.plus_index = _np.concatenate([
            _np.arange(self.offsets[e] + self.grids[e].points,
                       self.offsets[e] + 2 * self.grids[e].points)
            for e in self.edge_ids])

    def __repr__(self):
        return '<StateLayout with {} edges and {} unknowns>'.format(
            len(self.edge_ids), self.size)

    def minus(self, edge):
        o, n = self.offsets[edge], self.grids[edge].points
        return slice(o, o + n)

    def plus(self, edge):
        o, n = self.offsets[edge], self.grids[edge].points
        return slice(o + n, o + 2 * n)

    def block(self, edge):
        o, n = self.offsets[edge], self.grids[edge].points
        return slice(o, o + 2 * n)

    def outflow_index(self, edge, sign):
        """Index of the value leaving ``edge`` at its start (``sign=-1``) or end (``+1``)."""
        o, n = self.offsets[edge], self.grids[edge].points
        return o if sign < 0 else o + 2 * n - 1

    def inflow_index(self, edge, sign):
        """Index of the value entering ``edge`` at its start (``sign=-1``) or end (``+1``)."""
        o, n = self.offsets[edge], self.grids[edge].points
        return o + n if sign < 0 else o + n - 1

    def pair_sum(self, values):
        """Return ``w_minus + w_plus`` per grid node, for one or many state vectors."""
        values = _np.asarray(values)
        return values[..., self.minus_index] + values[..., self.plus_index]

    def state_weights(self):
        """Trapezoid weights for every entry of the state vector."""
        weights = _np.empty(self.size)
        for edge in self.edge_ids:
            w = self.grids[edge].weights
            weights[self.minus(edge)] = w
            weights[self.plus(edge)] = w
        return weights

    def node_weights(self):
        """Trapezoid weights for every displacement node."""
        return _np.concatenate([self.grids[e].weights for e in self.edge_ids])

    def node_positions(self):
        """Position ``x`` on its edge for every displacement node."""
        return _np.concatenate([self.grids[e].x for e in self.edge_ids])

    def node_edges(self):
        """Edge id for every displacement node."""
        return _np.concatenate([_np.full(self.grids[e].points, e) for e in self.edge_ids])

    def pack(self, w_minus, w_plus):
        """Build a state vector from per-edge arrays."""
        vector = _np.empty(self.size)
        for edge in self.edge_ids:
            vector[self.minus(edge)] = _checked(w_minus[edge], self.grids[edge], edge)
            vector[self.plus(edge)] = _checked(w_plus[edge], self.grids[edge], edge)
        return vector

    def unpack(self, vector):
        """Split a state vector into per-edge arrays ``(w_minus, w_plus)``."""
        w_minus = {edge: vector[self.minus(edge)].copy() for edge in self.edge_ids}
        w_plus = {edge: vector[self.plus(edge)].copy() for edge in self.edge_ids}
        return w_minus, w_plus

    def join_nodes(self, per_edge):
        """Concatenate per-edge displacement arrays into one vector."""
        return _np.concatenate([
            _checked(per_edge[edge], self.grids[edge], edge) for edge in self.edge_ids])


def _checked(values, grid, edge):
    if isinstance(values, _Real):
        return _np.full(grid.points, float(values))
    values = _np.asarray(values, dtype=float)
    if values.shape != (grid.points,):
        message = 'Edge {} needs {} grid values, got an array of shape {}.'.format(
            edge, grid.points, values.shape)
        raise ValueError(message)
    return values
