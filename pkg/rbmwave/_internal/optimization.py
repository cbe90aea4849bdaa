import time as _time
from collections import namedtuple as _namedtuple
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .args import check_count as _check_count
from .args import check_positive as _check_positive
from .controls import ControlVector as _ControlVector
from .controls import H2Metric as _H2Metric
from .discretization import OperatorCache as _OperatorCache
from .discretization import Trajectory as _Trajectory
from .discretization import initial_displacement as _initial_displacement
from .discretization import march as _march
from .discretization import reconstruct_values as _reconstruct_values
from .errors import SolverError as _SolverError
from .errors import UndefinedRelativeError as _UndefinedRelativeError
from .expressions import Expression as _Expression
from .graph import MetricGraph as _MetricGraph
from .grids import StateLayout as _StateLayout
from .grids import TimeGrid as _TimeGrid
from .randomization import RealizationVector as _RealizationVector
from .randomization import SubsetScheme as _SubsetScheme
from .riemann import initial_riemann as _initial_riemann


STEP_RULES = ('backtracking', 'fixed', 'exact')
ARMIJO = 1e-4
MAX_HALVINGS = 60


CostBreakdown = _namedtuple('CostBreakdown', ['tracking', 'regularization', 'total'])
CostBreakdown.__doc__ = """Tracking term, H2 regularization and their sum."""


class OptimizerConfig(_namedtuple('OptimizerConfig', [
        'alpha', 'max_iters', 'grad_tol', 'step_rule', 'conjugate', 'step_size',
        'warm_start'])):
    """Settings of the descent method.

    Parameters
    ----------
    alpha : float
        Regularization weight, > 0.
    max_iters : int
    grad_tol : float or None
        Tolerance on the H2-dual norm of the gradient. ``None`` means
        ``1e-8 * (1 + |J(0)|)``.
    step_rule : str
        ``"backtracking"`` (Armijo, halving, first trial step ``1/alpha``),
        ``"fixed"`` or ``"exact"`` (minimizer along the search direction).
    conjugate : bool
        If ``True``, search directions are conjugated (Polak-Ribiere with
        restarts, which is preconditioned CG together with the exact rule).
    step_size : float or None
        Step of the fixed rule and first trial step of backtracking.
    warm_start : bool
        If ``True``, control studies start every randomized problem from the
        deterministic optimum instead of zero.

    """

    __slots__ = ()

    def __new__(cls, alpha=1.0, max_iters=500, grad_tol=None, step_rule='backtracking',
                conjugate=False, step_size=None, warm_start=False):
        _check_positive(alpha, 'alpha')
        _check_count(max_iters, 'max_iters', minimum=1)
        _check_positive(grad_tol, 'grad_tol', allow_none=True)
        _check_arg(step_rule, 'step_rule', str, STEP_RULES)
        _check_arg(conjugate, 'conjugate', bool)
        _check_positive(step_size, 'step_size', allow_none=True)
        _check_arg(warm_start, 'warm_start', bool)
        return super().__new__(cls, float(alpha), int(max_iters), grad_tol, step_rule,
                               conjugate, step_size, warm_start)


OcpSolution = _namedtuple('OcpSolution', [
    'control', 'cost', 'iterations', 'gradient_norm', 'converged', 'wall_time', 'history'])
OcpSolution.__doc__ = """Result of an optimal control solve.

``converged`` is ``True`` if the gradient tolerance was met or the cost stopped
decreasing in working precision, and ``False`` if ``max_iters`` was reached first.
``history`` lists the cost after every accepted step.
"""


class ControlProblem:
    """Tracking problem for the displacement with boundary controls.

    The dynamics are deterministic unless a scheme and a realization are given.

    Parameters
    ----------
    graph : MetricGraph
    grids : dict of EdgeGrid
    tgrid : TimeGrid
    initial : InitialData, InitialCondition or None
    target : float, Expression, numpy.ndarray or Trajectory
        Desired displacement. An expression in ``t`` is constant in space, one in
        ``x`` is constant in time. An array needs shape ``(steps + 1, nodes)``.
    scheme : SubsetScheme, optional
    realization : RealizationVector, optional
    cache : OperatorCache, optional

    """

    def __init__(self, graph, grids, tgrid, initial=None, target=1.0, scheme=None,
                 realization=None, cache=None):
        _check_arg(graph, 'graph', _MetricGraph)
        _check_arg(tgrid, 'tgrid', _TimeGrid)
        _check_arg(scheme, 'scheme', _SubsetScheme, allow_none=True)
        _check_arg(realization, 'realization', _RealizationVector, allow_none=True)
        _check_arg(cache, 'cache', _OperatorCache, allow_none=True)
        if (scheme is None) != (realization is None):
            raise ValueError('Randomized dynamics need both a scheme and a realization.')
        self.graph = graph
        self.grids = grids
        self.tgrid = tgrid
        self.initial = initial
        self.scheme = scheme
        self.realization = realization
        self.layout = _StateLayout(graph, grids)
        if cache is None:
            cache = _OperatorCache(graph, grids, tgrid.h)
        elif not cache.matches(graph, grids, tgrid.h):
            raise ValueError('The operator cache was built for another graph, grid or step '
                             'size.')
        self.cache = cache

        # Dynamics
        if scheme is None:
            self.operators = [cache.deterministic()] * tgrid.steps
        else:
            scheme.check_graph(graph)
            if len(realization.indices) != tgrid.steps:
                message = 'The realization has {} indices but the time grid has {} steps.'
                raise ValueError(message.format(len(realization.indices), tgrid.steps))
            self.operators = cache.for_realization(scheme, realization)

        # Data
        state = _initial_riemann(initial, graph, grids)
        self._x0 = self.layout.pack(state.w_minus, state.w_plus)
        self._y0 = _initial_displacement(initial, self.layout)
        self._weights = self.layout.node_weights()
        self.target = sample_target(target, self.layout, tgrid)

    def __repr__(self):
        kind = 'randomized' if self.is_randomized else 'deterministic'
        return '<ControlProblem with {} dynamics, {} steps, {} controlled vertices>'.format(
            kind, self.tgrid.steps, len(self.graph.controlled_vertices))

    @property
    def is_randomized(self):
        return self.scheme is not None

    def randomized(self, scheme, realization):
        """Return the same problem with randomized dynamics, sharing the operator cache."""
        return ControlProblem(self.graph, self.grids, self.tgrid, self.initial, self.target,
                              scheme, realization, self.cache)

    def zero_control(self):
        return _ControlVector.zeros(self.graph, self.tgrid)

    def simulate(self, control):
        """Simulate the dynamics of this problem for a control and return the Trajectory."""
        control = self._checked(control)
        start = _time.perf_counter()
        values = _march(self.operators, self._x0, control)
        return _Trajectory(values, self.layout, self.tgrid, self._y0,
                           _time.perf_counter() - start, self.realization)

    def displacement(self, values, homogeneous=False):
        """Displacement at all times from stacked state vectors.

        With ``homogeneous=True`` the initial displacement is taken as zero.

        """
        y0 = _np.zeros_like(self._y0) if homogeneous else self._y0
        return _reconstruct_values(values, self.layout, y0, self.tgrid.h)

    def response(self, values, homogeneous=False):
        """Displacement caused by control samples, optionally without the initial data."""
        control = _ControlVector(values, self.tgrid, self.graph.controlled_vertices)
        x0 = _np.zeros_like(self._x0) if homogeneous else self._x0
        return self.displacement(_march(self.operators, x0, control), homogeneous)

    def tracking(self, y):
        """``1/2 * sum_{n>=1} h * sum_nodes q (y - y_d)**2`` with trapezoid weights ``q``."""
        difference = y[1:] - self.target[1:]
        return 0.5 * self.tgrid.h * float(_np.sum((difference ** 2) @ self._weights))

    def tracking_gradient(self, y):
        """Gradient of the tracking term with respect to all control samples.

        Reverse sweep over the time steps with transposed solves of the cached
        step operators.

        """
        h = self.tgrid.h
        steps = self.tgrid.steps
        residual = h * (y - self.target) * self._weights[None, :]
        residual[0] = 0.0
        # r[m] = sum_{n >= m} residual[n]
        accumulated = _np.cumsum(residual[::-1], axis=0)[::-1]
        sources = _np.zeros((steps + 1, self.layout.size))
        sources[:, self.layout.minus_index] = 0.5 * h * accumulated
        sources[:, self.layout.plus_index] = 0.5 * h * accumulated

        gradient = _np.zeros((len(self.graph.controlled_vertices), steps + 1))
        lam = sources[steps]
        for m in range(steps, 0, -1):
            back, control_gradient = self.operators[m - 1].adjoint(lam)
            gradient[:, m] = control_gradient
            lam = sources[m - 1] + back
        return gradient

    def _checked(self, control):
        if control is None:
            return self.zero_control()
        _check_arg(control, 'control', _ControlVector)
        if control.tgrid != self.tgrid or control.vertices != self.graph.controlled_vertices:
            raise ValueError('The control needs to be sampled on the time grid of the problem '
                             'at the controlled vertices {}.'.format(
                                 list(self.graph.controlled_vertices)))
        return control


def sample_target(target, layout, tgrid):
    """Sample a desired displacement on all times and grid nodes."""
    shape = (tgrid.steps + 1, layout.node_count)
    if isinstance(target, _Trajectory):
        target = target.y
    if isinstance(target, _Real) and not isinstance(target, bool):
        return _np.full(shape, float(target))
    if isinstance(target, _Expression):
        if target.variable == 't':
            return _np.repeat(target(tgrid.times)[:, None], layout.node_count, axis=1)
        return _np.repeat(target(layout.node_positions())[None, :], tgrid.steps + 1, axis=0)
    target = _np.asarray(target, dtype=float)
    if target.shape != shape:
        raise ValueError('The target needs shape {}, got {}.'.format(shape, target.shape))
    return target


def cost(problem, control, alpha):
    """Evaluate the discrete cost of a control.

    Parameters
    ----------
    problem : ControlProblem
    control : ControlVector
    alpha : float

    Returns
    -------
    breakdown : CostBreakdown

    """
    _check_arg(problem, 'problem', ControlProblem)
    _check_positive(alpha, 'alpha', allow_zero=True)
    control = problem._checked(control)
    y = problem.response(control.values)
    tracking = problem.tracking(y)
    regularization = 0.5 * alpha * _H2Metric.of(problem.tgrid).inner(
        control.values, control.values)
    return CostBreakdown(tracking, regularization, tracking + regularization)


def gradient(problem, control, alpha):
    """Exact gradient of the discrete cost with respect to the control samples.

    Returns
    -------
    gradient : numpy.ndarray, shape (controlled vertices, steps + 1)

    """
    _check_arg(problem, 'problem', ControlProblem)
    _check_positive(alpha, 'alpha', allow_zero=True)
    control = problem._checked(control)
    y = problem.response(control.values)
    metric = _H2Metric.of(problem.tgrid)
    return problem.tracking_gradient(y) + alpha * metric.apply(control.values)


def solve_ocp(problem, config=None, start=None, verbose=False):
    """Minimize the cost for the deterministic dynamics.

    Parameters
    ----------
    problem : ControlProblem
        Needs deterministic dynamics.
    config : OptimizerConfig, optional
    start : ControlVector, optional
        First iterate, zero by default.
    verbose : bool

    Returns
    -------
    solution : OcpSolution

    Raises
    ------
    SolverError
        If a line search accepts no step.

    """
    _check_arg(problem, 'problem', ControlProblem)
    if problem.is_randomized:
        raise ValueError('solve_ocp needs deterministic dynamics, use solve_rocp.')
    return _descend(problem, config, start, verbose)


def solve_rocp(problem, scheme, realization, config=None, start=None, verbose=False):
    """Minimize the cost for the randomized dynamics of one realization."""
    _check_arg(problem, 'problem', ControlProblem)
    return _descend(problem.randomized(scheme, realization), config, start, verbose)


def _descend(problem, config, start, verbose):
    config = OptimizerConfig() if config is None else config
    _check_arg(config, 'config', OptimizerConfig)
    alpha = config.alpha
    h = problem.tgrid.h
    metric = _H2Metric.of(problem.tgrid)
    weights = problem._weights
    begin = _time.perf_counter()

    # Initial iterate
    u = problem._checked(start).values.copy()
    y = problem.response(u)
    value = problem.tracking(y) + 0.5 * alpha * metric.inner(u, u)
    g = problem.tracking_gradient(y) + alpha * metric.apply(u)
    riesz = metric.riesz(g)
    norm_squared = float(_np.sum(g * riesz))
    grad_tol = config.grad_tol
    if grad_tol is None:
        free = value if start is None else problem.tracking(problem.response(
            _np.zeros_like(u)))
        grad_tol = 1e-8 * (1.0 + abs(free))
    history = [value]
    direction = None
    converged = False
    iterations = 0

    while True:
        gradient_norm = _np.sqrt(max(norm_squared, 0.0))
        if gradient_norm <= grad_tol:
            converged = True
            break
        if iterations >= config.max_iters:
            break
        iterations += 1

        # Search direction in the H2 metric
        if config.conjugate and direction is not None:
            # Polak-Ribiere, restarted with the gradient direction when negative
            beta = max(0.0, float(_np.sum((g - previous_g) * riesz)) / previous_squared)
            direction = -riesz + beta * direction
        else:
            direction = -riesz
        slope = float(_np.sum(g * direction))
        if slope >= 0.0:
            direction = -riesz
            slope = -norm_squared

        # Cost along the line is quadratic: J(u + s d) from the linear response of d
        dy = problem.response(direction, homogeneous=True)
        curvature = h * float(_np.sum((dy[1:] ** 2) @ weights)) + \
            alpha * metric.inner(direction, direction)

        def line(step):
            trial_u = u + step * direction
            return problem.tracking(y + step * dy) + 0.5 * alpha * metric.inner(
                trial_u, trial_u)

        if config.step_rule == 'exact':
            step = -slope / curvature
            trial = line(step)
        elif config.step_rule == 'fixed':
            step = config.step_size if config.step_size is not None else 1.0 / alpha
            trial = line(step)
        else:
            step = config.step_size if config.step_size is not None else 1.0 / alpha
            for _ in range(MAX_HALVINGS):
                trial = line(step)
                if _np.isfinite(trial) and trial <= value + ARMIJO * step * slope:
                    break
                step *= 0.5
            else:
                message = ('Line search accepted no step in iteration {}: cost {:.6e}, '
                           'gradient norm {:.3e}, directional derivative {:.3e}.'.format(
                               iterations, value, gradient_norm, slope))
                raise _SolverError(message)
        if not _np.isfinite(trial):
            raise _SolverError('Non-finite cost in iteration {} with step {:.3e}.'.format(
                iterations, step))
        if config.step_rule != 'fixed' and not trial < value:
            # No further decrease is representable, the minimum is reached in working precision
            iterations -= 1
            converged = True
            break

        # Update
        u = u + step * direction
        y = y + step * dy
        value = trial
        history.append(value)
        previous_g = g
        g = problem.tracking_gradient(y) + alpha * metric.apply(u)
        riesz = metric.riesz(g)
        previous_squared = norm_squared
        norm_squared = float(_np.sum(g * riesz))
        if verbose and iterations % 10 == 0:
            print('Iteration {}: cost {:.8e}, gradient norm {:.3e}'.format(
                iterations, value, _np.sqrt(max(norm_squared, 0.0))))

    control = _ControlVector(u, problem.tgrid, problem.graph.controlled_vertices)
    tracking = problem.tracking(y)
    breakdown = CostBreakdown(tracking, value - tracking, value)
    wall_time = _time.perf_counter() - begin
    if verbose:
        print('Done. {} iterations, cost {:.8e}, gradient norm {:.3e}, {}converged, '
              '{:.3f} s.'.format(iterations, value, gradient_norm,
                                 '' if converged else 'not ', wall_time))
    return OcpSolution(control, breakdown, iterations, float(gradient_norm), converged,
                       wall_time, history)


def compare_controls(a, b):
    """Relative L2 and H2 differences of control ``a`` with respect to the reference ``b``.

    Raises
    ------
    UndefinedRelativeError
        If ``b`` is zero.

    """
    _check_arg(a, 'a', _ControlVector)
    _check_arg(b, 'b', _ControlVector)
    if a.tgrid != b.tgrid or a.vertices != b.vertices:
        raise ValueError('Controls need the same time grid and vertices.')
    metric = _H2Metric.of(b.tgrid)
    difference = a.values - b.values
    l2 = metric.l2_norm(b.values)
    h2 = metric.norm(b.values)
    if not (l2 > 0.0 and h2 > 0.0):
        raise _UndefinedRelativeError('The reference control is zero, a relative difference '
                                      'is undefined.')
    return metric.l2_norm(difference) / l2, metric.norm(difference) / h2
