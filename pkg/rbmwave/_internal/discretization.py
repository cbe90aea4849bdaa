import threading as _threading
import time as _time

import numpy as _np
import scipy.sparse as _sp
from scipy.sparse.linalg import splu as _splu

from .args import check_arg as _check_arg
from .args import check_positive as _check_positive
from .controls import ControlVector as _ControlVector
from .errors import SolverError as _SolverError
from .errors import UndefinedRelativeError as _UndefinedRelativeError
from .graph import MetricGraph as _MetricGraph
from .graph import c_tot as _c_tot
from .graph import edges_at as _edges_at
from .grids import StateLayout as _StateLayout
from .grids import TimeGrid as _TimeGrid
from .randomization import RealizationVector as _RealizationVector
from .randomization import SubsetScheme as _SubsetScheme
from .randomization import pattern_speeds as _pattern_speeds
from .riemann import RiemannState as _RiemannState
from .riemann import initial_riemann as _initial_riemann
from .riemann import integrate_velocity as _integrate_velocity


# Time steps between two checks for non-finite states
CHECK_INTERVAL = 64


class SystemOperator:
    """One backward Euler step of the upwind transport system for a fixed speed pattern.

    The step solves ``M x_new = S x_old + B u_new``. Edges with speed zero are
    frozen: all their values are held, so only the values of moving edges enter
    the factorized system.

    Attributes
    ----------
    key : object
        Label of the pattern, e.g. ``"deterministic"`` or a subset index.
    speeds : tuple of float
        Transport speed of every edge, ordered by edge id.
    lhs, rhs : scipy.sparse.csr_matrix
        Full matrices ``M`` and ``S``.
    control_map : scipy.sparse.csr_matrix
        Full matrix ``B``, one column per controlled vertex.
    active : numpy.ndarray
        Indices of the values of moving edges.

    """

    def __init__(self, key, speeds, lhs, rhs, control_map, active):
        self.key = key
        self.speeds = speeds
        self.lhs = lhs
        self.rhs = rhs
        self.control_map = control_map
        self.size = lhs.shape[0]
        mask = _np.zeros(self.size, dtype=bool)
        mask[active] = True
        self.active = _np.flatnonzero(mask)
        self.frozen = _np.flatnonzero(~mask)
        self.moves_all = self.frozen.size == 0
        self._no_gradient = _np.zeros(control_map.shape[1])
        self._no_gradient.flags.writeable = False
        self._control = self._control_t = None

        if self.active.size == 0:
            self._lu = None
            return

        # Reduced system on the moving values, frozen values enter as known data
        lhs_active = lhs[self.active, :]
        held = _sp.diags((~mask).astype(float))
        self._transfer = (rhs[self.active, :] - lhs_active @ held).tocsr()
        self._transfer_t = self._transfer.T.tocsr()
        control = control_map[self.active, :].tocsr()
        # Patterns whose moving edges touch no controlled vertex ignore the control
        if control.nnz:
            self._control = control
            self._control_t = control.T.tocsr()
        try:
            self._lu = _splu(lhs_active[:, self.active].tocsc())
        except RuntimeError as excp:
            raise _SolverError('Factorization of the step operator for pattern {!r} '
                               'failed: {}'.format(key, excp)) from None

    def __repr__(self):
        return '<SystemOperator {!r} with {} of {} values active>'.format(
            self.key, self.active.size, self.size)

    @property
    def uses_control(self):
        return self._control is not None

    def advance(self, x, u_new, out=None):
        """Perform one time step from ``x`` with controls ``u_new`` at the new time.

        The new state is written into ``out`` if given, which must not share
        memory with ``x``.

        """
        if out is None:
            out = _np.empty_like(x)
        if self._lu is None:
            _np.copyto(out, x)
            return out
        rhs = self._transfer @ x
        if self._control is not None:
            rhs += self._control @ u_new
        if self.moves_all:
            out[:] = self._lu.solve(rhs)
        else:
            _np.copyto(out, x)
            out[self.active] = self._lu.solve(rhs)
        return out

    def adjoint(self, lam):
        """Apply the transposed step.

        Returns
        -------
        back : numpy.ndarray
            Transposed state map applied to ``lam``.
        control_gradient : numpy.ndarray
            Transposed control map applied to ``lam``, one entry per controlled vertex.

        """
        if self._lu is None:
            return lam.copy(), self._no_gradient
        z = self._lu.solve(lam if self.moves_all else lam[self.active], trans='T')
        back = self._transfer_t @ z
        if not self.moves_all:
            back[self.frozen] += lam[self.frozen]
        if self._control_t is None:
            return back, self._no_gradient
        return back, self._control_t @ z

    def residual(self, x, x_new, u_new):
        """Largest entry of ``M x_new - S x - B u_new``."""
        r = self.lhs @ x_new - self.rhs @ x
        if self.control_map.shape[1]:
            r -= self.control_map @ u_new
        return float(_np.max(_np.abs(r))) if r.size else 0.0


def assemble_operator(graph, grids, h, speeds, key=None):
    """Assemble and factorize the implicit step operator for given transport speeds.

    Interior values are upwinded: ``w_plus`` from the ``x=0`` side, ``w_minus``
    from the ``x=length`` side. The value entering an edge at a vertex is coupled
    at the new time level to the values leaving all incident edges, always with
    the original speeds of the graph. Frozen edges get identity rows.

    Parameters
    ----------
    graph : MetricGraph
    grids : dict of EdgeGrid
    h : float
        Time step.
    speeds : dict or sequence of float
        Transport speed per edge, >= 0. A sequence is read in edge id order.
    key : object, optional
        Label stored on the operator.

    Returns
    -------
    operator : SystemOperator

    """
    # Argument processing
    _check_arg(graph, 'graph', _MetricGraph)
    _check_positive(h, 'h')
    speeds = _speed_tuple(graph, speeds)
    layout = _StateLayout(graph, grids)

    rows, cols, vals = [], [], []
    rhs_diagonal = _np.zeros(layout.size)
    control_rows, control_cols, control_vals = [], [], []
    column_of = {v: j for j, v in enumerate(graph.controlled_vertices)}

    def add(row, col, value):
        rows.append(row)
        cols.append(col)
        vals.append(value)

    for e, speed in zip(graph.edges, speeds):
        grid = layout.grids[e.id]
        minus, plus = layout.minus(e.id), layout.plus(e.id)
        n = grid.points
        if speed == 0.0:
            block = _np.arange(minus.start, plus.stop)
            rows.extend(block.tolist())
            cols.extend(block.tolist())
            vals.extend([1.0] * block.size)
            rhs_diagonal[block] = 1.0
            continue

        # Upwind transport rows
        lam = h * speed / grid.dx
        for i in range(n - 1):
            row = minus.start + i
            add(row, row, 1.0 + lam)
            add(row, row + 1, -lam)
            rhs_diagonal[row] = 1.0
        for i in range(1, n):
            row = plus.start + i
            add(row, row, 1.0 + lam)
            add(row, row - 1, -lam)
            rhs_diagonal[row] = 1.0

        # Coupling rows: in + out - 2/c_tot * sum_k c_k out_k = 2/c_tot * u
        for vertex, sign in ((e.start, -1), (e.end, +1)):
            row = layout.inflow_index(e.id, sign)
            total = _c_tot(graph, vertex)
            add(row, row, 1.0)
            add(row, layout.outflow_index(e.id, sign), 1.0)
            for other, other_sign in _edges_at(graph, vertex):
                add(row, layout.outflow_index(other, other_sign),
                    -2.0 / total * graph.edge(other).speed)
            if vertex in column_of:
                control_rows.append(row)
                control_cols.append(column_of[vertex])
                control_vals.append(2.0 / total)

    size = layout.size
    lhs = _sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    rhs = _sp.diags(rhs_diagonal).tocsr()
    control_map = _sp.csr_matrix(
        (control_vals, (control_rows, control_cols)), shape=(size, len(column_of)))
    active = _np.concatenate([
        _np.arange(layout.block(e.id).start, layout.block(e.id).stop)
        for e, speed in zip(graph.edges, speeds) if speed != 0.0] or [_np.array([], int)])
    return SystemOperator(key, speeds, lhs, rhs, control_map, active)


class OperatorCache:
    """Factorized step operators of one graph, grid and time step, keyed by speed pattern.

    Patterns with identical speeds share one operator, so the deterministic
    pattern and a subset containing every edge with probability one use the
    same factorization. Lookups are guarded by a lock.

    """

    def __init__(self, graph, grids, h):
        _check_arg(graph, 'graph', _MetricGraph)
        _check_positive(h, 'h')
        self.graph = graph
        self.grids = grids
        self.h = float(h)
        self.factorizations = 0
        self._operators = {}
        self._lock = _threading.Lock()

    def __repr__(self):
        return '<OperatorCache with {} operators for h={}>'.format(len(self._operators), self.h)

    def __len__(self):
        return len(self._operators)

    def get(self, speeds, key=None):
        """Return the operator for a speed pattern, assembling it on first use."""
        speeds = _speed_tuple(self.graph, speeds)
        with self._lock:
            operator = self._operators.get(speeds)
            if operator is None:
                operator = assemble_operator(self.graph, self.grids, self.h, speeds, key)
                self._operators[speeds] = operator
                self.factorizations += 1
        return operator

    def deterministic(self):
        return self.get(tuple(e.speed for e in self.graph.edges), key='deterministic')

    def for_subset(self, scheme, index):
        return self.get(_pattern_speeds(scheme, self.graph, index), key=int(index))

    def for_realization(self, scheme, realization):
        """Return the operator of every time step of a realization."""
        unique = {int(i): self.for_subset(scheme, int(i))
                  for i in _np.unique(realization.indices)}
        return [unique[int(i)] for i in realization.indices]

    def matches(self, graph, grids, h):
        return self.graph is graph and self.grids == grids and abs(self.h - h) <= 1e-12 * h


class Trajectory:
    """Time history of the Riemann invariants of one simulation.

    Attributes
    ----------
    values : numpy.ndarray, shape (steps + 1, layout.size)
        State vectors at all times of ``tgrid``.
    layout : StateLayout
    tgrid : TimeGrid
    wall_time : float
        Seconds spent on operator lookup and time stepping.

    """

    def __init__(self, values, layout, tgrid, y0, wall_time=0.0, realization=None):
        self.values = values
        self.layout = layout
        self.tgrid = tgrid
        self.y0 = y0
        self.wall_time = wall_time
        self.realization = realization
        self._y = None

    def __repr__(self):
        return '<Trajectory with {} steps of {} values>'.format(
            self.tgrid.steps, self.layout.size)

    def __len__(self):
        return self.values.shape[0]

    def state(self, step):
        """Return the RiemannState at a time index."""
        w_minus, w_plus = self.layout.unpack(self.values[step])
        return _RiemannState(w_minus, w_plus, float(step * self.tgrid.h))

    @property
    def states(self):
        """RiemannState at every time, e.g. as input of :func:`reconstruct_y`."""
        return [self.state(n) for n in range(len(self))]

    @property
    def y(self):
        """Displacement at every time and grid node, reconstructed on first access."""
        if self._y is None:
            self._y = reconstruct_values(self.values, self.layout, self.y0, self.tgrid.h)
        return self._y


def reconstruct_values(values, layout, y0, h):
    """Displacement of stacked state vectors, one row per time."""
    return _integrate_velocity(0.5 * layout.pair_sum(values), y0[None, :], h)


def simulate_deterministic(graph, initial, control, grids, tgrid, cache=None, verbose=False):
    """Simulate the networked wave equation with the original speeds on all edges.

    Parameters
    ----------
    graph : MetricGraph
    initial : InitialData, InitialCondition or None
        ``None`` stands for zero initial data.
    control : ControlVector or None
        ``None`` stands for zero control.
    grids : dict of EdgeGrid
    tgrid : TimeGrid
    cache : OperatorCache, optional
        Reused across calls with the same graph, grids and step size.
    verbose : bool
        If ``True``, a short message is printed when the simulation is done.

    Returns
    -------
    trajectory : Trajectory

    Raises
    ------
    SolverError
        If a step produces non-finite values. The message names the step.

    """
    layout, x0, y0, control, cache = _prepare(graph, initial, control, grids, tgrid, cache)
    start = _time.perf_counter()
    operators = [cache.deterministic()] * tgrid.steps
    values = march(operators, x0, control)
    wall_time = _time.perf_counter() - start
    if verbose:
        print('Done. Deterministic simulation with {} steps of h={} in {:.3f} s.'.format(
            tgrid.steps, tgrid.h, wall_time))
    return Trajectory(values, layout, tgrid, y0, wall_time)


def simulate_randomized(graph, scheme, realization, initial, control, grids, tgrid,
                        cache=None, verbose=False):
    """Simulate the randomized dynamics along one realization of active subsets.

    In time interval ``k`` every edge of subset ``realization.indices[k]`` moves with
    speed ``c/pi``, all other edges are frozen. Vertex couplings always use the
    original speeds.

    Parameters
    ----------
    graph : MetricGraph
    scheme : SubsetScheme
    realization : RealizationVector
        One subset index per time step of ``tgrid``.
    initial, control, grids, tgrid, cache, verbose
        As in :func:`simulate_deterministic`.

    Returns
    -------
    trajectory : Trajectory

    """
    _check_arg(scheme, 'scheme', _SubsetScheme)
    _check_arg(realization, 'realization', _RealizationVector)
    scheme.check_graph(graph)
    if len(realization.indices) != tgrid.steps:
        message = 'The realization has {} indices but the time grid has {} steps.'.format(
            len(realization.indices), tgrid.steps)
        raise ValueError(message)
    layout, x0, y0, control, cache = _prepare(graph, initial, control, grids, tgrid, cache)
    start = _time.perf_counter()
    operators = cache.for_realization(scheme, realization)
    values = march(operators, x0, control)
    wall_time = _time.perf_counter() - start
    if verbose:
        print('Done. Randomized simulation with {} steps of h={} in {:.3f} s.'.format(
            tgrid.steps, tgrid.h, wall_time))
    return Trajectory(values, layout, tgrid, y0, wall_time, realization)


def _prepare(graph, initial, control, grids, tgrid, cache):
    _check_arg(graph, 'graph', _MetricGraph)
    _check_arg(tgrid, 'tgrid', _TimeGrid)
    _check_arg(control, 'control', _ControlVector, allow_none=True)
    _check_arg(cache, 'cache', OperatorCache, allow_none=True)
    layout = _StateLayout(graph, grids)
    if control is None:
        control = _ControlVector.zeros(graph, tgrid)
    if control.tgrid != tgrid or control.vertices != graph.controlled_vertices:
        raise ValueError('The control needs to be sampled on the time grid at the '
                         'controlled vertices {}.'.format(list(graph.controlled_vertices)))
    if cache is None:
        cache = OperatorCache(graph, grids, tgrid.h)
    elif not cache.matches(graph, grids, tgrid.h):
        raise ValueError('The operator cache was built for another graph, grid or step size.')
    state = _initial_riemann(initial, graph, grids)
    x0 = layout.pack(state.w_minus, state.w_plus)
    y0 = initial_displacement(initial, layout)
    return layout, x0, y0, control, cache


def initial_displacement(initial, layout):
    """Initial displacement as a node vector."""
    if initial is None:
        return _np.zeros(layout.node_count)
    if hasattr(initial, 'sample'):
        initial = initial.sample(layout.grids)
    return layout.join_nodes(initial.y0)


def march(operators, x0, control):
    """Apply one operator per time step, starting from ``x0``.

    Returns
    -------
    values : numpy.ndarray, shape (len(operators) + 1, x0.size)

    """
    steps = len(operators)
    values = _np.empty((steps + 1, x0.size))
    values[0] = x0
    samples = _np.ascontiguousarray(control.values.T)
    checked = 1
    with _np.errstate(over='ignore', invalid='ignore'):
        for step, operator in enumerate(operators, start=1):
            operator.advance(values[step - 1], samples[step], values[step])
            if step % CHECK_INTERVAL == 0 or step == steps:
                _check_finite(values, checked, step + 1, steps)
                checked = step + 1
    return values


def _check_finite(values, first, stop, steps):
    finite = _np.isfinite(values[first:stop]).all(axis=1)
    if not finite.all():
        step = first + int(_np.argmin(finite))
        raise _SolverError('Non-finite state after time step {} of {}.'.format(step, steps))


def error_norms(a, b):
    """Relative errors of trajectory ``a`` with respect to the reference ``b``.

    Both norms are the maximum over the time grid of the spatial L2 norm, computed
    with the trapezoid rule on every edge.

    Returns
    -------
    rel_w : float
        Error of the Riemann invariants, both components summed.
    rel_y : float
        Error of the reconstructed displacements.

    Raises
    ------
    UndefinedRelativeError
        If the reference has norm zero.

    """
    _check_arg(a, 'a', Trajectory)
    _check_arg(b, 'b', Trajectory)
    if a.values.shape != b.values.shape or a.tgrid != b.tgrid:
        raise ValueError('Trajectories need the same grids, got shapes {} and {}.'.format(
            a.values.shape, b.values.shape))
    rel_w = _relative_sup_l2(a.values, b.values, b.layout.state_weights(), 'w')
    rel_y = _relative_sup_l2(a.y, b.y, b.layout.node_weights(), 'y')
    return rel_w, rel_y


def _relative_sup_l2(a, b, weights, name):
    denominator = _np.sqrt(_np.max((b ** 2) @ weights))
    if not denominator > 0.0:
        raise _UndefinedRelativeError(
            'The reference {} has norm zero, a relative error is undefined.'.format(name))
    numerator = _np.sqrt(_np.max(((a - b) ** 2) @ weights))
    return float(numerator / denominator)


def discrete_energy(trajectory):
    """Discrete energy ``sum dx * (w_minus**2 + w_plus**2) / 4`` at every time.

    The sum runs over all grid values except the two values per edge that are
    set by a vertex coupling. Without control this quantity does not increase
    under the deterministic scheme.

    """
    _check_arg(trajectory, 'trajectory', Trajectory)
    layout = trajectory.layout
    weights = _np.zeros(layout.size)
    for edge in layout.edge_ids:
        grid = layout.grids[edge]
        weights[layout.block(edge)] = grid.dx
        weights[layout.inflow_index(edge, -1)] = 0.0
        weights[layout.inflow_index(edge, +1)] = 0.0
    return 0.25 * ((trajectory.values ** 2) @ weights)


def _speed_tuple(graph, speeds):
    if isinstance(speeds, dict):
        if sorted(speeds) != list(graph.edge_ids):
            raise ValueError('Speeds need to be given for exactly the edges {}.'.format(
                list(graph.edge_ids)))
        speeds = [speeds[e] for e in graph.edge_ids]
    speeds = tuple(float(s) for s in speeds)
    if len(speeds) != len(graph.edges):
        raise ValueError('Got {} speeds for {} edges.'.format(len(speeds), len(graph.edges)))
    for s in speeds:
        if not (_np.isfinite(s) and s >= 0.0):
            raise ValueError('Speeds need to be finite and >= 0, got {}.'.format(s))
    return speeds


