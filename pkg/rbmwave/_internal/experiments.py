"""Monte Carlo studies comparing randomized with deterministic dynamics."""

import time as _time
from collections import namedtuple as _namedtuple
from concurrent.futures import ThreadPoolExecutor as _ThreadPoolExecutor

import numpy as _np
from scipy import stats as _stats

from .args import check_arg as _check_arg
from .characteristics import validate_lemma41 as _validate_lemma41
from .characteristics import validate_lemma42 as _validate_lemma42
from .controls import ControlVector as _ControlVector
from .discretization import OperatorCache as _OperatorCache
from .discretization import discrete_energy as _discrete_energy
from .discretization import error_norms as _error_norms
from .discretization import simulate_deterministic as _simulate_deterministic
from .discretization import simulate_randomized as _simulate_randomized
from .errors import SolverError as _SolverError
from .errors import UndefinedRelativeError as _UndefinedRelativeError
from .expressions import constant as _constant
from .expressions import zero as _zero
from .grids import build_grids as _build_grids
from .grids import build_time_grid as _build_time_grid
from .optimization import ControlProblem as _ControlProblem
from .optimization import OptimizerConfig as _OptimizerConfig
from .optimization import compare_controls as _compare_controls
from .optimization import solve_ocp as _solve_ocp
from .optimization import solve_rocp as _solve_rocp
from .randomization import SEED_LIMIT as _SEED_LIMIT
from .randomization import full_scheme as _full_scheme
from .randomization import sample_realization as _sample_realization
from .riemann import InitialCondition as _InitialCondition


PERCENT_METRICS = ('rel_w', 'rel_y', 'gap', 'rel_L2', 'rel_H2')
TIMING_METRICS = ('time_D', 'time_RD', 'time_ratio')


StudyRow = _namedtuple('StudyRow', ['h', 'metric', 'mean', 'std'])
StudyRow.__doc__ = """Mean and sample standard deviation of one metric at one step size.

Relative errors listed in ``PERCENT_METRICS`` are given in percent.
"""

LemmaSettings = _namedtuple('LemmaSettings', ['edges', 's', 't', 't_floor', 'h', 'samples'])
LemmaSettings.__new__.__defaults__ = ((1,), 0.0, 1.0, 0.5, (0.02, 0.005), 10000)
LemmaSettings.__doc__ = """Edges, times, step sizes and sample count of a lemma validation."""


class ExperimentConfig(_namedtuple('ExperimentConfig', [
        'network', 'scheme', 'horizon', 'h', 'max_dx', 'control', 'target', 'initial',
        'alpha', 'realizations', 'seed', 'optimizer', 'lemmas', 'workers'])):
    """Validated settings of a study.

    Parameters
    ----------
    network : MetricGraph
    scheme : SubsetScheme or None
        ``None`` stands for the single subset of all edges.
    horizon : float
    h : tuple of float
        Step sizes, each dividing ``horizon``.
    max_dx : float
    control : Expression or str
        Control in ``t`` for forward studies, or ``"optimize"``.
    target : Expression
        Desired displacement ``y_d``.
    initial : InitialCondition
    alpha : float
    realizations : int
    seed : int
        Realization ``r`` of a step size uses seed ``seed + r``.
    optimizer : OptimizerConfig
    lemmas : LemmaSettings or None
    workers : int
        Threads for the realizations of one step size.

    """

    __slots__ = ()

    def __new__(cls, network, scheme=None, horizon=1.0, h=(0.01,), max_dx=0.05,
                control=None, target=None, initial=None, alpha=1.0, realizations=20, seed=0,
                optimizer=None, lemmas=None, workers=1):
        if scheme is None:
            scheme = _full_scheme(network)
        if control is None:
            control = _zero('t')
        if target is None:
            target = _constant(1.0, 't')
        if initial is None:
            initial = _InitialCondition()
        if optimizer is None:
            optimizer = _OptimizerConfig(alpha=alpha)
        h = tuple(float(value) for value in h)
        if not h:
            raise ValueError('A study needs at least one step size.')
        if realizations < 1:
            raise ValueError('A study needs at least one realization, got {}.'.format(
                realizations))
        return super().__new__(cls, network, scheme, float(horizon), h, float(max_dx), control,
                               target, initial, float(alpha), int(realizations), int(seed),
                               optimizer, lemmas, int(workers))

    @property
    def optimizes(self):
        return isinstance(self.control, str) and self.control == 'optimize'

    def seeds(self):
        return [(self.seed + r) % _SEED_LIMIT for r in range(self.realizations)]


def summarize(values):
    """Return the mean and the sample standard deviation (0 for a single value)."""
    values = _np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError('Cannot summarize an empty list of values.')
    std = float(_np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(_np.mean(values)), std


def estimate_rate(pairs):
    """Fit ``error = C * h**rate`` by least squares in log-log scale.

    Parameters
    ----------
    pairs : list of (h, error)
        At least two distinct step sizes, errors > 0.

    Returns
    -------
    exponent : float
    r_squared : float

    """
    pairs = [(float(h), float(error)) for h, error in pairs]
    if len({h for h, _ in pairs}) < 2:
        raise ValueError('A rate estimate needs at least two distinct step sizes.')
    for h, error in pairs:
        if not (h > 0.0 and error > 0.0 and _np.isfinite(error)):
            raise ValueError('A rate estimate needs positive step sizes and errors, got '
                             'h={} with error {}.'.format(h, error))
    log_h = _np.log([h for h, _ in pairs])
    log_error = _np.log([error for _, error in pairs])
    if _np.ptp(log_error) == 0.0:
        return 0.0, 1.0
    fit = _stats.linregress(log_h, log_error)
    return float(fit.slope), float(fit.rvalue ** 2)


def rate_of(rows, metric):
    """Rate of the means of one metric over the step sizes of study rows."""
    return estimate_rate([(row.h, row.mean) for row in rows if row.metric == metric])


def run_forward_study(config, verbose=False, timings=True):
    """Compare randomized with deterministic simulations for every step size.

    For each ``h`` one deterministic reference run and ``config.realizations``
    randomized runs are performed with a shared operator cache.

    Parameters
    ----------
    config : ExperimentConfig
        ``config.control`` needs to be an expression.
    verbose : bool
    timings : bool
        If ``False``, the rows on wall times are omitted, which makes the result a
        pure function of the configuration.

    Returns
    -------
    rows : list of StudyRow
        Metrics ``time_D``, ``time_RD``, ``time_ratio``, ``rel_w``, ``rel_y`` and
        ``factorizations`` per step size.

    """
    _check_arg(config, 'config', ExperimentConfig)
    if config.optimizes:
        raise ValueError('A forward study needs a control expression, not "optimize".')
    graph = config.network
    grids = _build_grids(graph, config.max_dx)

    rows = []
    for h in config.h:
        start = _time.perf_counter()
        tgrid = _build_time_grid(config.horizon, h)
        cache = _OperatorCache(graph, grids, tgrid.h)
        _prefill(cache, config.scheme)
        control = _ControlVector.from_expression(config.control, graph, tgrid)
        reference = _simulate_deterministic(graph, config.initial, control, grids, tgrid, cache)

        def realize(seed):
            realization = _sample_realization(config.scheme, tgrid.steps, seed)
            try:
                run = _simulate_randomized(graph, config.scheme, realization, config.initial,
                                           control, grids, tgrid, cache)
            except _SolverError as excp:
                raise _SolverError('Forward study at h={}, seed {}: {}'.format(
                    h, seed, excp)) from None
            rel_w, rel_y = _relative_errors(run, reference)
            return run.wall_time, rel_w, rel_y

        results = _np.array(_map(realize, config.seeds(), config.workers))
        metrics = {
            'time_D': [reference.wall_time],
            'time_RD': results[:, 0],
            'time_ratio': results[:, 0] / reference.wall_time,
            'rel_w': 100.0 * results[:, 1],
            'rel_y': 100.0 * results[:, 2],
            'factorizations': [cache.factorizations],
        }
        rows.extend(_rows(tgrid.h, metrics, timings))
        if verbose:
            print('Done. {} realizations at h={} in {:.1f} s.'.format(
                config.realizations, h, _time.perf_counter() - start))
    return rows


def run_control_study(config, verbose=False, timings=True):
    """Compare randomized with deterministic optimal controls for every step size.

    For each ``h`` the deterministic problem is solved once and the randomized
    problem once per realization. The trajectories compared in ``rel_w`` and
    ``rel_y`` are deterministic simulations driven by the randomized and by the
    deterministic optimal control. With ``optimizer.warm_start`` every randomized
    problem starts from the deterministic optimum.

    Returns
    -------
    rows : list of StudyRow
        Metrics ``time_D``, ``time_RD``, ``time_ratio``, ``gap``, ``rel_L2``,
        ``rel_H2``, ``rel_w``, ``rel_y`` and ``nonconverged`` per step size.
        ``nonconverged`` counts the solves, reference included, that stopped at
        ``max_iters``.

    """
    _check_arg(config, 'config', ExperimentConfig)
    if not config.optimizes:
        raise ValueError('A control study needs "control": "optimize".')
    graph = config.network
    grids = _build_grids(graph, config.max_dx)
    optimizer = config.optimizer._replace(alpha=config.alpha)

    rows = []
    for h in config.h:
        start = _time.perf_counter()
        tgrid = _build_time_grid(config.horizon, h)
        cache = _OperatorCache(graph, grids, tgrid.h)
        _prefill(cache, config.scheme)
        problem = _ControlProblem(graph, grids, tgrid, config.initial, config.target,
                                  cache=cache)
        optimum = _solve_ocp(problem, optimizer)
        reference = problem.simulate(optimum.control)
        first_iterate = optimum.control if optimizer.warm_start else None
        if verbose:
            print('Reference control at h={}: cost {:.6e} after {} iterations.'.format(
                h, optimum.cost.total, optimum.iterations))

        def realize(seed):
            realization = _sample_realization(config.scheme, tgrid.steps, seed)
            try:
                solution = _solve_rocp(problem, config.scheme, realization, optimizer,
                                       first_iterate)
            except _SolverError as excp:
                raise _SolverError('Control study at h={}, seed {}: {}'.format(
                    h, seed, excp)) from None
            gap = _relative_gap(solution.cost.total, optimum.cost.total)
            rel_l2, rel_h2 = _control_errors(solution.control, optimum.control)
            rel_w, rel_y = _relative_errors(problem.simulate(solution.control), reference)
            return (solution.wall_time, gap, rel_l2, rel_h2, rel_w, rel_y,
                    not solution.converged)

        results = _np.array(_map(realize, config.seeds(), config.workers), dtype=float)
        metrics = {
            'time_D': [optimum.wall_time],
            'time_RD': results[:, 0],
            'time_ratio': results[:, 0] / optimum.wall_time,
            'gap': 100.0 * results[:, 1],
            'rel_L2': 100.0 * results[:, 2],
            'rel_H2': 100.0 * results[:, 3],
            'rel_w': 100.0 * results[:, 4],
            'rel_y': 100.0 * results[:, 5],
            'nonconverged': [results[:, 6].sum() + (not optimum.converged)],
        }
        rows.extend(_rows(tgrid.h, metrics, timings))
        if verbose:
            print('Done. {} randomized control problems at h={} in {:.1f} s.'.format(
                config.realizations, h, _time.perf_counter() - start))
    return rows


def run_simulation(config, h=None, randomized=False, seed=None, verbose=False):
    """Simulate once with the first (or a given) step size of a configuration.

    Returns
    -------
    trajectory : Trajectory
    rows : list of StudyRow
        Wall time, final discrete energy and largest displacement. A randomized run
        also reports ``rel_w`` and ``rel_y`` against the deterministic run.

    """
    _check_arg(config, 'config', ExperimentConfig)
    if config.optimizes:
        raise ValueError('A simulation needs a control expression, not "optimize".')
    graph = config.network
    grids = _build_grids(graph, config.max_dx)
    tgrid = _build_time_grid(config.horizon, config.h[0] if h is None else h)
    cache = _OperatorCache(graph, grids, tgrid.h)
    control = _ControlVector.from_expression(config.control, graph, tgrid)
    trajectory = _simulate_deterministic(graph, config.initial, control, grids, tgrid, cache,
                                         verbose)
    metrics = {'time_D': [trajectory.wall_time]}
    if randomized:
        seed = config.seed if seed is None else seed
        realization = _sample_realization(config.scheme, tgrid.steps, seed)
        reference = trajectory
        trajectory = _simulate_randomized(graph, config.scheme, realization, config.initial,
                                          control, grids, tgrid, cache, verbose)
        rel_w, rel_y = _relative_errors(trajectory, reference)
        metrics = {
            'time_D': [reference.wall_time],
            'time_RD': [trajectory.wall_time],
            'rel_w': [100.0 * rel_w],
            'rel_y': [100.0 * rel_y],
        }
    metrics['energy'] = [_discrete_energy(trajectory)[-1]]
    metrics['max_abs_y'] = [float(_np.max(_np.abs(trajectory.y)))]
    return trajectory, _rows(tgrid.h, metrics, True)


def run_optimization(config, h=None, randomized=False, seed=None, verbose=False):
    """Solve the deterministic or one randomized optimal control problem once.

    Returns
    -------
    solution : OcpSolution
    rows : list of StudyRow

    """
    _check_arg(config, 'config', ExperimentConfig)
    graph = config.network
    grids = _build_grids(graph, config.max_dx)
    tgrid = _build_time_grid(config.horizon, config.h[0] if h is None else h)
    problem = _ControlProblem(graph, grids, tgrid, config.initial, config.target)
    optimizer = config.optimizer._replace(alpha=config.alpha)
    if randomized:
        seed = config.seed if seed is None else seed
        realization = _sample_realization(config.scheme, tgrid.steps, seed)
        solution = _solve_rocp(problem, config.scheme, realization, optimizer, verbose=verbose)
    else:
        solution = _solve_ocp(problem, optimizer, verbose=verbose)
    metrics = {
        'time_RD' if randomized else 'time_D': [solution.wall_time],
        'cost': [solution.cost.total],
        'tracking': [solution.cost.tracking],
        'regularization': [solution.cost.regularization],
        'iterations': [solution.iterations],
        'gradient_norm': [solution.gradient_norm],
        'nonconverged': [float(not solution.converged)],
    }
    return solution, _rows(tgrid.h, metrics, True)


def run_lemma_validation(config, verbose=False):
    """Validate both characteristic estimates for the edges and step sizes of a configuration.

    Mean square reports of consecutive step sizes carry the ratio of their
    estimates. Every estimate draws from its own seed, ``config.seed`` plus a
    running number.

    Returns
    -------
    reports : list of LemmaReport

    """
    _check_arg(config, 'config', ExperimentConfig)
    settings = config.lemmas if config.lemmas is not None else LemmaSettings()
    graph = config.network
    reports = []
    counter = 0
    for edge_id in settings.edges:
        edge = graph.edge(edge_id)
        previous = None
        for h in settings.h:
            seed = (config.seed + counter) % _SEED_LIMIT
            report = _validate_lemma41(
                config.scheme, edge.id, edge.speed, settings.s, settings.t, h,
                settings.samples, seed, edge.length, graph, verbose)
            if previous is not None and report.lhs_estimate > 0.0:
                report = report._replace(ratio=previous.lhs_estimate / report.lhs_estimate)
            reports.append(report)
            previous = report
            seed = (config.seed + counter + 1) % _SEED_LIMIT
            reports.append(_validate_lemma42(
                config.scheme, edge.id, edge.speed, settings.t_floor, settings.t, h,
                settings.samples, seed, edge.length, '+', graph, verbose))
            counter += 2
    return reports


def _prefill(cache, scheme):
    # Operators are assembled before realizations run concurrently
    cache.deterministic()
    for index in range(1, len(scheme) + 1):
        cache.for_subset(scheme, index)


def _map(function, seeds, workers):
    if workers <= 1:
        return [function(seed) for seed in seeds]
    with _ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, seeds))


def _rows(h, metrics, timings):
    rows = []
    for metric, values in metrics.items():
        if not timings and metric in TIMING_METRICS:
            continue
        mean, std = summarize(values)
        rows.append(StudyRow(float(h), metric, mean, std))
    return rows


def _relative_errors(run, reference):
    try:
        return _error_norms(run, reference)
    except _UndefinedRelativeError:
        if _np.array_equal(run.values, reference.values):
            return 0.0, 0.0
        raise


def _control_errors(control, reference):
    try:
        return _compare_controls(control, reference)
    except _UndefinedRelativeError:
        if not _np.any(control.values):
            return 0.0, 0.0
        raise


def _relative_gap(value, reference):
    if reference == 0.0:
        if value == 0.0:
            return 0.0
        raise _UndefinedRelativeError('The optimal cost of the reference is zero, a relative '
                                      'gap is undefined.')
    return abs(value - reference) / abs(reference)
