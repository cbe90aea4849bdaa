from collections import namedtuple as _namedtuple
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .args import check_positive as _check_positive
from .errors import StructureError as _StructureError
from .expressions import Expression as _Expression
from .expressions import zero as _zero
from .graph import MetricGraph as _MetricGraph


RiemannState = _namedtuple('RiemannState', ['w_minus', 'w_plus', 'time'])
RiemannState.__doc__ = """Riemann invariants on all edges at one time.

``w_minus`` and ``w_plus`` map an edge id to an array of grid values.
"""

NodeFlows = _namedtuple('NodeFlows', ['vertex', 'outflows', 'inflows'])
NodeFlows.__doc__ = """Invariants leaving and entering the incident edges at one vertex."""

InitialData = _namedtuple('InitialData', ['y0', 'y0x', 'y1'])
InitialData.__doc__ = """Initial displacement, its derivative and initial velocity.

Each field maps an edge id to an array sampled on the grid of that edge.
"""


class InitialCondition(_namedtuple('InitialCondition', ['y0', 'y1'])):
    """Initial displacement ``y0`` and velocity ``y1`` as expressions in ``x``.

    The same expressions are applied on every edge in its local coordinate.

    """

    __slots__ = ()

    def __new__(cls, y0=None, y1=None):
        y0 = _zero('x') if y0 is None else y0
        y1 = _zero('x') if y1 is None else y1
        _check_arg(y0, 'y0', _Expression)
        _check_arg(y1, 'y1', _Expression)
        return super().__new__(cls, y0, y1)

    @property
    def is_zero(self):
        return self.y0.kind == 'zero' and self.y1.kind == 'zero'

    def sample(self, grids):
        """Sample the expressions on edge grids and return InitialData.

        The derivative of ``y0`` is taken in closed form when available and by
        second-order finite differences otherwise.

        """
        y0, y0x, y1 = {}, {}, {}
        for edge, grid in grids.items():
            x = grid.x
            y0[edge] = self.y0(x)
            y1[edge] = self.y1(x)
            derivative = self.y0.derivative(x)
            if derivative is None:
                derivative = _np.gradient(y0[edge], grid.dx, edge_order=2 if x.size > 2 else 1)
            y0x[edge] = derivative
        return InitialData(y0, y0x, y1)


def to_riemann(yt, yx, speed):
    """Transform velocity and slope into the Riemann invariants.

    Parameters
    ----------
    yt : float or numpy.ndarray
        Time derivative of the displacement.
    yx : float or numpy.ndarray
        Space derivative of the displacement.
    speed : float
        Wave speed, > 0.

    Returns
    -------
    w_minus, w_plus
        ``yt + speed*yx`` and ``yt - speed*yx``. The first travels towards
        decreasing ``x``, the second towards increasing ``x``.

    """
    _check_positive(speed, 'speed')
    return yt + speed * yx, yt - speed * yx


def from_riemann(w_minus, w_plus, speed):
    """Invert :func:`to_riemann` and return ``(yt, yx)``."""
    _check_positive(speed, 'speed')
    return (w_minus + w_plus) / 2.0, (w_minus - w_plus) / (2.0 * speed)


def initial_riemann(data, graph, grids):
    """Convert initial data into the Riemann invariants at time zero.

    Parameters
    ----------
    data : InitialData or InitialCondition or None
        ``None`` stands for zero initial data.
    graph : MetricGraph
    grids : dict of EdgeGrid

    Returns
    -------
    state : RiemannState

    Raises
    ------
    ValueError
        If a sampled array does not match the grid of its edge.

    """
    # Argument processing
    _check_arg(graph, 'graph', _MetricGraph)
    _check_arg(data, 'data', (InitialData, InitialCondition), allow_none=True)
    if data is None:
        data = InitialCondition()
    if isinstance(data, InitialCondition):
        data = data.sample(grids)

    # Pointwise transform with the original speed of each edge
    w_minus, w_plus = {}, {}
    for e in graph.edges:
        grid = grids[e.id]
        arrays = []
        for name in ('y0x', 'y1'):
            values = _np.asarray(getattr(data, name)[e.id], dtype=float)
            if values.shape != (grid.points,):
                message = ('Initial data "{}" on edge {} needs {} values, '
                           'got shape {}.'.format(name, e.id, grid.points, values.shape))
                raise ValueError(message)
            arrays.append(values)
        y0x, y1 = arrays
        w_minus[e.id], w_plus[e.id] = to_riemann(y1, y0x, e.speed)
    return RiemannState(w_minus, w_plus, 0.0)


def node_coupling(vertex, outflows, speeds, c_tot, control=0.0):
    """Compute the inflows at a vertex from the outflows of its incident edges.

    Parameters
    ----------
    vertex : int
        Vertex id, only used in messages.
    outflows : dict
        Maps incident edge id to the invariant that leaves the edge at the vertex.
    speeds : dict
        Maps incident edge id to its original wave speed.
    c_tot : float
        Sum of the speeds.
    control : float
        Signed control ``-u`` at a controlled vertex, 0 elsewhere.

    Returns
    -------
    inflows : dict
        ``in_e = -out_e + 2/c_tot * (sum_k c_k out_k - control)`` for every edge.

    Raises
    ------
    StructureError
        If the vertex has no incident edge.

    """
    if not outflows:
        raise _StructureError('Vertex {} has no incident edges.'.format(vertex))
    if set(outflows) != set(speeds):
        message = 'Outflows and speeds at vertex {} refer to different edges: {} vs {}'.format(
            vertex, sorted(outflows), sorted(speeds))
        raise ValueError(message)
    _check_positive(c_tot, 'c_tot')
    _check_arg(control, 'control', _Real)

    level = 2.0 / c_tot * (sum(speeds[e] * outflows[e] for e in sorted(outflows)) - control)
    return {e: level - outflows[e] for e in sorted(outflows)}


def verify_node_conditions(flows, speeds, control=0.0):
    """Measure how well flows at a vertex satisfy the Kirchhoff and continuity conditions.

    Returns
    -------
    kirchhoff_residual : float
        ``|sum_e c_e (out_e - in_e) / 2 - control|``
    continuity_residual : float
        Largest difference of ``in_e + out_e`` between two incident edges.

    """
    _check_arg(flows, 'flows', NodeFlows)
    edges = sorted(flows.outflows)
    flux = sum(speeds[e] * (flows.outflows[e] - flows.inflows[e]) for e in edges) / 2.0
    kirchhoff = abs(flux - control)
    sums = [flows.inflows[e] + flows.outflows[e] for e in edges]
    continuity = max(sums) - min(sums) if sums else 0.0
    return float(kirchhoff), float(continuity)


def integrate_velocity(velocity, y0, h):
    """Right-endpoint rectangle rule ``y_n = y0 + h * sum_{m=1..n} v_m`` along the first axis.

    The velocity at the first time does not enter.

    """
    velocity = _np.array(velocity, dtype=float)
    velocity[0] = 0.0
    return _np.asarray(y0, dtype=float) + h * _np.cumsum(velocity, axis=0)


def reconstruct_y(states, y0, h):
    """Integrate the velocity ``(w_minus + w_plus)/2`` in time to get the displacement.

    The rectangle rule with right endpoints is used, i.e.
    ``y(t_n) = y0 + h * sum_{m=1..n} (w_minus(t_m) + w_plus(t_m)) / 2``.

    Parameters
    ----------
    states : list of RiemannState
        States on a uniform time grid, starting at time zero.
    y0 : dict
        Maps edge id to the initial displacement on its grid.
    h : float
        Time step.

    Returns
    -------
    y : list of dict
        Displacement per edge at every time of ``states``.

    """
    _check_positive(h, 'h')
    if len(states) == 0:
        raise ValueError('Argument "states" is empty.')
    result = {}
    for edge in states[0].w_minus:
        velocity = [(s.w_minus[edge] + s.w_plus[edge]) / 2.0 for s in states]
        result[edge] = integrate_velocity(velocity, y0[edge], h)
    return [{edge: result[edge][n] for edge in result} for n in range(len(states))]
