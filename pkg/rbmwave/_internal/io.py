import csv as _csv
import errno as _errno
import io as _io
import json as _json
import os as _os
from numbers import Integral as _Integral
from numbers import Real as _Real

import numpy as _np

from .args import check_arg as _check_arg
from .characteristics import LemmaReport as _LemmaReport
from .controls import ControlVector as _ControlVector
from .discretization import Trajectory as _Trajectory
from .errors import ConfigError as _ConfigError
from .experiments import PERCENT_METRICS as _PERCENT_METRICS
from .experiments import ExperimentConfig as _ExperimentConfig
from .experiments import LemmaSettings as _LemmaSettings
from .experiments import StudyRow as _StudyRow
from .expressions import parse_expression as _parse_expression
from .graph import MetricGraph as _MetricGraph
from .grids import build_time_grid as _build_time_grid
from .optimization import STEP_RULES as _STEP_RULES
from .optimization import OptimizerConfig as _OptimizerConfig
from .randomization import SEED_LIMIT as _SEED_LIMIT
from .randomization import SubsetScheme as _SubsetScheme
from .randomization import full_scheme as _full_scheme
from .riemann import InitialCondition as _InitialCondition


FIXTURE_DIR = _os.path.join(_os.path.dirname(_os.path.abspath(__file__)), 'fixtures')
FORMATS = ('csv', 'json')
CONFIG_KEYS = ('network', 'scheme', 'horizon', 'h', 'max_dx', 'control', 'target', 'initial',
               'alpha', 'realizations', 'seed', 'optimizer', 'lemmas', 'workers')


def list_fixtures():
    """Return the names of the documents that ship with the package."""
    return sorted(name[:-5] for name in _os.listdir(FIXTURE_DIR) if name.endswith('.json'))


def fixture_path(name):
    """Return the path of a shipped document, e.g. ``"diamond"`` or ``"diamond-forward"``."""
    _check_arg(name, 'name', str, list_fixtures())
    return _os.path.join(FIXTURE_DIR, name + '.json')


def resolve_path(reference, base_dir=None):
    """Find a document given as path, path relative to ``base_dir`` or fixture name.

    Raises
    ------
    FileNotFoundError
        If none of the candidates exists.

    """
    _check_arg(reference, 'reference', str)
    candidates = [reference]
    if base_dir is not None and not _os.path.isabs(reference):
        candidates.append(_os.path.join(base_dir, reference))
    for candidate in candidates:
        if _os.path.isfile(candidate):
            return candidate
    if reference in list_fixtures():
        return fixture_path(reference)
    raise FileNotFoundError(_errno.ENOENT, _os.strerror(_errno.ENOENT), reference)


def read_document(filepath):
    """Read a JSON document.

    Raises
    ------
    FileNotFoundError
    ConfigError
        If the text is not valid JSON. The message names line and column.

    """
    _check_arg(filepath, 'filepath', str)
    if not _os.path.isfile(filepath):
        raise FileNotFoundError(_errno.ENOENT, _os.strerror(_errno.ENOENT), filepath)
    with open(filepath, encoding='utf-8') as f:
        text = f.read()
    try:
        return _json.loads(text)
    except _json.JSONDecodeError as excp:
        message = 'Malformed JSON in "{}" at column {}: {}'.format(filepath, excp.colno, excp.msg)
        raise _ConfigError(message, line=excp.lineno) from None


def load_network(reference, verbose=False):
    """Load a network document from a path or fixture name and return a MetricGraph."""
    filepath = resolve_path(reference)
    graph = parse_network(read_document(filepath))
    if verbose:
        print('Loaded a network with {} vertices and {} edges from "{}".'.format(
            graph.vertex_count, len(graph.edges), filepath))
    return graph


def parse_network(document, field=None):
    """Create a MetricGraph from a network document.

    Parameters
    ----------
    document : dict
        Keys ``vertex_count``, ``edges`` (objects with ``id``, ``start``, ``end``,
        ``length`` and ``speed``) and optionally ``controlled_vertices``. A
        ``scheme`` key is allowed and read by :func:`parse_config`.
    field : str, optional
        Path of the document inside an enclosing one, used in messages.

    Raises
    ------
    ConfigError
        If a field is missing, has a wrong type or an invalid value.
    StructureError
        If the edges do not form a connected graph without self-loops.

    """
    _require_object(document, field)
    _reject_unknown(document, ('vertex_count', 'edges', 'controlled_vertices', 'scheme'),
                    field)
    vertex_count = _integer(document, 'vertex_count', field, minimum=2)
    edges = _list(document, 'edges', field)
    if not edges:
        raise _ConfigError('A network needs at least one edge.', _join(field, 'edges'))

    specs = []
    for i, edge in enumerate(edges):
        path = _join(field, 'edges[{}]'.format(i))
        _require_object(edge, path)
        _reject_unknown(edge, ('id', 'start', 'end', 'length', 'speed'), path)
        start = _integer(edge, 'start', path, minimum=1)
        end = _integer(edge, 'end', path, minimum=1)
        for key, vertex in (('start', start), ('end', end)):
            if vertex > vertex_count:
                raise _ConfigError('Vertex {} does not exist, the network has {} vertices.'.format(
                    vertex, vertex_count), _join(path, key))
        specs.append((_integer(edge, 'id', path, minimum=1), start, end,
                      _number(edge, 'length', path), _number(edge, 'speed', path)))

    controlled = document.get('controlled_vertices', [])
    if not isinstance(controlled, list) or not all(
            isinstance(v, _Integral) and not isinstance(v, bool) for v in controlled):
        raise _ConfigError('Expected a list of vertex ids, got {!r}.'.format(controlled),
                           _join(field, 'controlled_vertices'))
    return _MetricGraph(vertex_count, specs, controlled)


def parse_scheme(document, graph=None, field='scheme'):
    """Create a SubsetScheme from ``{"subsets": [...], "probabilities": [...]}``.

    With a graph, every edge needs a positive inclusion probability.

    Raises
    ------
    ConfigError
        If the document has the wrong shape.
    SchemeError
        If the probabilities are invalid or an edge is never active.

    """
    _require_object(document, field)
    _reject_unknown(document, ('subsets', 'probabilities'), field)
    subsets = _list(document, 'subsets', field)
    probabilities = _list(document, 'probabilities', field)
    for i, subset in enumerate(subsets):
        if not isinstance(subset, list):
            raise _ConfigError('Expected a list of edge ids, got {!r}.'.format(subset),
                               '{}.subsets[{}]'.format(field, i))
    scheme = _SubsetScheme(subsets, probabilities)
    if graph is not None:
        scheme.check_graph(graph)
    return scheme


def load_config(reference, verbose=False):
    """Load an experiment configuration from a path or fixture name."""
    filepath = resolve_path(reference)
    config = parse_config(read_document(filepath), _os.path.dirname(filepath))
    if verbose:
        print('Loaded a configuration with {} step sizes and {} realizations from "{}".'.format(
            len(config.h), config.realizations, filepath))
    return config


def parse_config(document, base_dir=None):
    """Create an ExperimentConfig from a configuration document.

    Parameters
    ----------
    document : dict
    base_dir : str, optional
        Directory that relative network paths are resolved against.

    Returns
    -------
    config : ExperimentConfig

    Raises
    ------
    ConfigError
        If a field is missing or invalid. The message names the field path.

    """
    _require_object(document, None)
    _reject_unknown(document, CONFIG_KEYS, None)

    # Network and scheme
    if 'network' not in document:
        raise _ConfigError('Missing required key.', 'network')
    network = document['network']
    if isinstance(network, str):
        network = read_document(resolve_path(network, base_dir))
        graph = parse_network(network)
    else:
        graph = parse_network(network, 'network')
    if 'scheme' in document:
        scheme = parse_scheme(document['scheme'], graph, 'scheme')
    elif isinstance(network, dict) and 'scheme' in network:
        scheme = parse_scheme(network['scheme'], graph, 'network.scheme')
    else:
        scheme = _full_scheme(graph)

    # Grids
    horizon = _number(document, 'horizon', None)
    steps = _list(document, 'h', None)
    if not steps:
        raise _ConfigError('At least one step size is required.', 'h')
    for i, h in enumerate(steps):
        field = 'h[{}]'.format(i)
        if isinstance(h, bool) or not isinstance(h, _Real) or not h > 0:
            raise _ConfigError('Expected a number > 0, got {!r}.'.format(h), field)
        try:
            _build_time_grid(horizon, h)
        except ValueError as excp:
            raise _ConfigError(str(excp), field) from None
    max_dx = _number(document, 'max_dx', None)

    # Data
    control = document.get('control', 'zero')
    if control != 'optimize':
        control = _parse_expression(control, 'control', 't')
    target = _parse_expression(document.get('target', 1.0), 'target', 't')
    initial = document.get('initial', {})
    _require_object(initial, 'initial')
    _reject_unknown(initial, ('y0', 'y1'), 'initial')
    initial = _InitialCondition(
        _parse_expression(initial.get('y0', 'zero'), 'initial.y0', 'x'),
        _parse_expression(initial.get('y1', 'zero'), 'initial.y1', 'x'))

    # Studies
    alpha = _number(document, 'alpha', None, default=1.0)
    realizations = _integer(document, 'realizations', None, minimum=1, default=20)
    seed = _integer(document, 'seed', None, minimum=0, default=0)
    if seed >= _SEED_LIMIT:
        raise _ConfigError('Seeds need to be below 2**64, got {}.'.format(seed), 'seed')
    workers = _integer(document, 'workers', None, minimum=1, default=1)
    optimizer = _parse_optimizer(document.get('optimizer', {}), alpha)
    lemmas = _parse_lemmas(document['lemmas'], graph) if 'lemmas' in document else None

    return _ExperimentConfig(graph, scheme, horizon, steps, max_dx, control, target, initial,
                             alpha, realizations, seed, optimizer, lemmas, workers)


def _parse_optimizer(document, alpha):
    field = 'optimizer'
    _require_object(document, field)
    keys = ('max_iters', 'grad_tol', 'step_rule', 'conjugate', 'step_size', 'warm_start')
    _reject_unknown(document, keys, field)
    step_rule = document.get('step_rule', 'backtracking')
    if step_rule not in _STEP_RULES:
        raise _ConfigError('Unknown step rule {!r}, allowed are {}.'.format(
            step_rule, ', '.join(_STEP_RULES)), 'optimizer.step_rule')
    return _OptimizerConfig(
        alpha=alpha,
        max_iters=_integer(document, 'max_iters', field, minimum=1, default=500),
        grad_tol=_number(document, 'grad_tol', field, default=None),
        step_rule=step_rule,
        conjugate=_flag(document, 'conjugate', field),
        step_size=_number(document, 'step_size', field, default=None),
        warm_start=_flag(document, 'warm_start', field))


def _flag(document, key, field):
    value = document.get(key, False)
    if not isinstance(value, bool):
        raise _ConfigError('Expected true or false, got {!r}.'.format(value),
                           '{}.{}'.format(field, key))
    return value


def _parse_lemmas(document, graph):
    field = 'lemmas'
    _require_object(document, field)
    _reject_unknown(document, _LemmaSettings._fields, field)
    defaults = _LemmaSettings()
    edges = document.get('edges', list(defaults.edges))
    if not isinstance(edges, list) or not edges or not all(
            isinstance(e, _Integral) and not isinstance(e, bool) and e in graph.edge_ids
            for e in edges):
        raise _ConfigError('Expected a nonempty list of edge ids of the network, got '
                           '{!r}.'.format(edges), 'lemmas.edges')
    steps = document.get('h', list(defaults.h))
    if not isinstance(steps, list) or not steps or not all(
            isinstance(h, _Real) and not isinstance(h, bool) and h > 0 for h in steps):
        raise _ConfigError('Expected a nonempty list of numbers > 0, got {!r}.'.format(steps),
                           'lemmas.h')
    settings = _LemmaSettings(
        tuple(int(e) for e in edges),
        _number(document, 's', field, default=defaults.s, positive=False),
        _number(document, 't', field, default=defaults.t),
        _number(document, 't_floor', field, default=defaults.t_floor, positive=False),
        tuple(float(h) for h in steps),
        _integer(document, 'samples', field, minimum=1000, default=defaults.samples))
    if not 0.0 <= settings.s < settings.t or not 0.0 <= settings.t_floor < settings.t:
        raise _ConfigError('Times need 0 <= s < t and 0 <= t_floor < t, got s={}, t={}, '
                           't_floor={}.'.format(settings.s, settings.t, settings.t_floor),
                           field)
    return settings


def emit(rows, format='csv'):
    """Convert study rows to a CSV or JSON document.

    CSV columns are ``h,metric,mean,std``. Metrics in percent are written with two
    decimals, all others in scientific notation. JSON keeps full precision.

    Returns
    -------
    text : str

    """
    _check_arg(format, 'format', str, FORMATS)
    rows = list(rows)
    if not rows:
        raise ValueError('Argument "rows" is empty, there is nothing to emit.')
    for row in rows:
        _check_arg(row, 'row', _StudyRow)
    if format == 'json':
        document = {'rows': [row._asdict() for row in rows]}
        return _json.dumps(document, indent=2) + '\n'

    buffer = _io.StringIO()
    writer = _csv.writer(buffer, lineterminator='\n')
    writer.writerow(_StudyRow._fields)
    for row in rows:
        pattern = '{:.2f}' if row.metric in _PERCENT_METRICS else '{:.6e}'
        writer.writerow([repr(row.h), row.metric, pattern.format(row.mean),
                         pattern.format(row.std)])
    return buffer.getvalue()


def parse_rows(text, format='csv'):
    """Read study rows back from a document created by :func:`emit`."""
    _check_arg(text, 'text', str)
    _check_arg(format, 'format', str, FORMATS)
    if format == 'json':
        return [_StudyRow(**row) for row in _json.loads(text)['rows']]
    reader = _csv.DictReader(_io.StringIO(text))
    return [_StudyRow(float(r['h']), r['metric'], float(r['mean']), float(r['std']))
            for r in reader]


def emit_reports(reports, format='csv'):
    """Convert lemma reports to a CSV or JSON document, undefined values as empty or null."""
    _check_arg(format, 'format', str, FORMATS)
    reports = list(reports)
    if not reports:
        raise ValueError('Argument "reports" is empty, there is nothing to emit.')
    for report in reports:
        _check_arg(report, 'report', _LemmaReport)
    records = [{key: _finite_or_none(value) for key, value in report._asdict().items()}
               for report in reports]
    if format == 'json':
        return _json.dumps({'reports': records}, indent=2) + '\n'
    buffer = _io.StringIO()
    writer = _csv.DictWriter(buffer, _LemmaReport._fields, lineterminator='\n')
    writer.writeheader()
    for record in records:
        writer.writerow({key: '' if value is None else value for key, value in record.items()})
    return buffer.getvalue()


def write_document(text, filepath, overwrite=False):
    """Write a text document to a file.

    Raises
    ------
    FileExistsError
        If the file exists and ``overwrite`` is ``False``.

    """
    _check_arg(text, 'text', str)
    _check_arg(filepath, 'filepath', str)
    _check_arg(overwrite, 'overwrite', bool)
    if not overwrite:
        check_if_file_exists(filepath)
    with open(filepath, 'w', encoding='utf-8') as f:
        f.write(text)


def export_trajectory(trajectory, filepath, stride=1, overwrite=False):
    """Export a trajectory as CSV columns ``t,edge,index,x,w_minus,w_plus,y``.

    Parameters
    ----------
    trajectory : Trajectory
    filepath : str
    stride : int
        Only every ``stride``-th time step is written, the last one always.
    overwrite : bool

    """
    _check_arg(trajectory, 'trajectory', _Trajectory)
    _check_arg(stride, 'stride', int)
    if stride < 1:
        raise ValueError('Argument "stride" needs to be >= 1, got {}.'.format(stride))
    if not overwrite:
        check_if_file_exists(filepath)

    layout = trajectory.layout
    steps = _np.arange(0, len(trajectory), stride)
    if steps[-1] != len(trajectory) - 1:
        steps = _np.append(steps, len(trajectory) - 1)
    nodes = layout.node_count
    index = _np.concatenate([_np.arange(layout.grids[e].points) for e in layout.edge_ids])
    values = trajectory.values[steps]
    columns = [
        _np.repeat(trajectory.tgrid.times[steps], nodes),
        _np.tile(layout.node_edges(), steps.size),
        _np.tile(index, steps.size),
        _np.tile(layout.node_positions(), steps.size),
        values[:, layout.minus_index].ravel(),
        values[:, layout.plus_index].ravel(),
        trajectory.y[steps].ravel(),
    ]
    _np.savetxt(filepath, _np.column_stack(columns), delimiter=',',
                fmt=['%.10g', '%d', '%d', '%.10g', '%.17g', '%.17g', '%.17g'],
                header='t,edge,index,x,w_minus,w_plus,y', comments='')


def export_controls(control, filepath, overwrite=False):
    """Export a control as CSV columns ``t,u_<vertex>`` for every controlled vertex."""
    _check_arg(control, 'control', _ControlVector)
    if not overwrite:
        check_if_file_exists(filepath)
    header = ','.join(['t'] + ['u_{}'.format(v) for v in control.vertices])
    table = _np.column_stack([control.tgrid.times] + list(control.values))
    _np.savetxt(filepath, table, delimiter=',', fmt='%.17g', header=header, comments='')


def check_if_file_exists(filepath):
    """Check if a filepath already exists.

    Raises
    ------
    FileExistsError : Raised if there is a file at the given filepath.

    """
    if _os.path.isfile(filepath):
        raise FileExistsError(_errno.EEXIST, _os.strerror(_errno.EEXIST), filepath)


def _join(field, key):
    return key if field is None else '{}.{}'.format(field, key)


def _require_object(document, field):
    if not isinstance(document, dict):
        raise _ConfigError('Expected an object, got {!r}.'.format(document), field)


def _reject_unknown(document, allowed, field):
    unknown = sorted(set(document) - set(allowed))
    if unknown:
        raise _ConfigError('Unknown keys {}, allowed are {}.'.format(
            unknown, ', '.join(allowed)), field)


_MISSING = object()


def _list(document, key, field):
    if key not in document:
        raise _ConfigError('Missing required key.', _join(field, key))
    value = document[key]
    if not isinstance(value, list):
        raise _ConfigError('Expected a list, got {!r}.'.format(value), _join(field, key))
    return value


def _number(document, key, field, default=_MISSING, positive=True):
    if key not in document or (document[key] is None and default is None):
        if default is _MISSING:
            raise _ConfigError('Missing required key.', _join(field, key))
        return default
    value = document[key]
    if isinstance(value, bool) or not isinstance(value, _Real) or not _np.isfinite(value):
        raise _ConfigError('Expected a finite number, got {!r}.'.format(value),
                           _join(field, key))
    if positive and not value > 0:
        raise _ConfigError('Expected a number > 0, got {!r}.'.format(value), _join(field, key))
    if not positive and value < 0:
        raise _ConfigError('Expected a number >= 0, got {!r}.'.format(value), _join(field, key))
    return float(value)


def _integer(document, key, field, minimum, default=_MISSING):
    if key not in document:
        if default is _MISSING:
            raise _ConfigError('Missing required key.', _join(field, key))
        return default
    value = document[key]
    if isinstance(value, bool) or not isinstance(value, _Integral):
        raise _ConfigError('Expected an integer, got {!r}.'.format(value), _join(field, key))
    if value < minimum:
        raise _ConfigError('Expected an integer >= {}, got {}.'.format(minimum, value),
                           _join(field, key))
    return int(value)


def _finite_or_none(value):
    if isinstance(value, float) and not _np.isfinite(value):
        return None
    return value
