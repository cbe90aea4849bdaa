import argparse
import os
import sys

from .errors import SolverError as _SolverError
from .errors import UndefinedRelativeError as _UndefinedRelativeError
from .experiments import rate_of as _rate_of
from .experiments import run_control_study as _run_control_study
from .experiments import run_forward_study as _run_forward_study
from .experiments import run_lemma_validation as _run_lemma_validation
from .experiments import run_optimization as _run_optimization
from .experiments import run_simulation as _run_simulation
from .io import FORMATS as _FORMATS
from .io import emit as _emit
from .io import emit_reports as _emit_reports
from .io import export_controls as _export_controls
from .io import export_trajectory as _export_trajectory
from .io import load_config as _load_config
from .io import resolve_path as _resolve_path
from .io import write_document as _write_document
from .randomization import SEED_LIMIT as _SEED_LIMIT


COMMANDS = {
    'simulate': 'simulate the deterministic dynamics once',
    'rbm-simulate': 'simulate one realization of the randomized dynamics',
    'ocp': 'solve the deterministic optimal control problem',
    'rocp': 'solve the randomized optimal control problem of one realization',
    'study-forward': 'compare randomized and deterministic simulations',
    'study-control': 'compare randomized and deterministic optimal controls',
    'validate-lemmas': 'check the estimates on randomized characteristics',
    'parse-check': 'validate a configuration and print a summary',
}
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def parse(argv=None):
    """Serve as CLI entry point by parsing arguments and calling corresponding functions."""
    # Create parser
    parser = argparse.ArgumentParser(
        prog='rbmwave',
        description='Simulate and control wave equations on networks with the random batch '
                    'method.',
        formatter_class=argparse.RawTextHelpFormatter)

    # Add arguments
    parser.add_argument(
        'command',
        choices=tuple(COMMANDS),
        metavar='command',
        help='one of\n{}'.format('\n'.join(
            '- "{}" {}'.format(name, text) for name, text in COMMANDS.items())))

    parser.add_argument(
        '--config',
        metavar='config_filepath',
        required=True,
        type=validate_source,
        help='path of a configuration file (.json) or name of a shipped one,'
             '\ne.g. "diamond-forward"')

    parser.add_argument(
        '--seed',
        metavar='seed',
        type=validate_seed,
        default=None,
        help='seed of the first realization, overrides the configuration')

    parser.add_argument(
        '--realizations',
        metavar='n',
        type=validate_count,
        default=None,
        help='number of realizations per step size, overrides the configuration')

    parser.add_argument(
        '--h',
        metavar='step_size',
        type=validate_step,
        default=None,
        help='time step for single runs, default: first step size of the configuration')

    parser.add_argument(
        '--out',
        metavar='output_filepath',
        default=None,
        help='path of the output document, default: print to stdout')

    parser.add_argument(
        '--format',
        choices=_FORMATS,
        default='csv',
        help='format of the output document, default: csv')

    parser.add_argument(
        '--export-trajectory',
        metavar='trajectory_filepath',
        default=None,
        help='write the trajectory of a single run as CSV columns'
             '\nt,edge,index,x,w_minus,w_plus,y')

    parser.add_argument(
        '--stride',
        metavar='k',
        type=validate_count,
        default=1,
        help='write only every k-th time step with --export-trajectory')

    parser.add_argument(
        '--export-controls',
        metavar='controls_filepath',
        default=None,
        help='write the optimal control of ocp or rocp as CSV columns t,u_<vertex>')

    parser.add_argument(
        '--no-timings',
        action='store_true',
        help='omit wall time rows, so that study output is reproducible')

    parser.add_argument(
        '-f',
        '--force',
        action='store_true',
        help='overwrite output files if they already exist')

    parser.add_argument(
        '-v',
        '--verbose',
        action='store_true',
        help='print messages about intermediary results')

    # Parse
    args = parser.parse_args(argv)
    overwrite = args.force

    # Mutually dependent checks
    targets = [args.out, args.export_trajectory, args.export_controls]
    for target in targets:
        if (not overwrite) and (target is not None) and os.path.exists(target):
            parser.error('The provided output filepath "{}" already exists. '
                         'You can use --force to overwrite it.'.format(target))
    if args.export_trajectory and args.command not in ('simulate', 'rbm-simulate'):
        parser.error('--export-trajectory is only available for simulate and rbm-simulate.')
    if args.export_controls and args.command not in ('ocp', 'rocp'):
        parser.error('--export-controls is only available for ocp and rocp.')

    # Perform the actions required by the arguments
    try:
        status = perform_it(args)
    except (_SolverError, _UndefinedRelativeError) as excp:
        print('rbmwave: solver failure: {}'.format(excp), file=sys.stderr)
        status = EXIT_SOLVER
    except (ValueError, TypeError, FileNotFoundError, FileExistsError) as excp:
        print('rbmwave: invalid input: {}'.format(excp), file=sys.stderr)
        status = EXIT_VALIDATION
    sys.exit(status)


def validate_source(filepath):
    """Check if the given configuration exists as file or shipped fixture."""
    try:
        return _resolve_path(filepath)
    except FileNotFoundError:
        message = 'The source filepath "{}" does not exist.'.format(filepath)
        raise argparse.ArgumentTypeError(message) from None


def validate_seed(text):
    """Check if the given seed is an integer in [0, 2**64)."""
    try:
        seed = int(text)
    except ValueError:
        seed = -1
    if not 0 <= seed < _SEED_LIMIT:
        message = 'The seed needs to be an integer in [0, 2**64), got "{}".'.format(text)
        raise argparse.ArgumentTypeError(message)
    return seed


def validate_count(text):
    """Check if the given text is a positive integer."""
    try:
        count = int(text)
    except ValueError:
        count = 0
    if count < 1:
        raise argparse.ArgumentTypeError('Expected an integer >= 1, got "{}".'.format(text))
    return count


def validate_step(text):
    """Check if the given text is a positive number."""
    try:
        step = float(text)
    except ValueError:
        step = 0.0
    if not step > 0.0:
        raise argparse.ArgumentTypeError('Expected a number > 0, got "{}".'.format(text))
    return step


def perform_it(args):
    """Perform the actions that were requested from the CLI and return the exit status."""
    verbose = args.verbose
    config = load_configuration(args.config, args, verbose)
    command = args.command

    if command == 'parse-check':
        print(describe(config))
        return 0

    if command == 'validate-lemmas':
        reports = _run_lemma_validation(config, verbose)
        store(_emit_reports(reports, args.format), args.out, args.force, verbose)
        failed = [r for r in reports if not r.passed]
        if failed:
            print('rbmwave: {} of {} lemma checks failed.'.format(len(failed), len(reports)),
                  file=sys.stderr)
            return EXIT_VALIDATION
        return 0

    if command in ('simulate', 'rbm-simulate'):
        printv('Simulating with h={}.'.format(args.h or config.h[0]), verbose)
        trajectory, rows = _run_simulation(
            config, args.h, command == 'rbm-simulate', args.seed, verbose)
        if args.export_trajectory:
            _export_trajectory(trajectory, args.export_trajectory, args.stride, args.force)
            printv('Done. Trajectory written to "{}" ({} bytes).'.format(
                args.export_trajectory, get_filesize(args.export_trajectory)), verbose)
    elif command in ('ocp', 'rocp'):
        printv('Solving the optimal control problem with h={}.'.format(
            args.h or config.h[0]), verbose)
        solution, rows = _run_optimization(config, args.h, command == 'rocp', args.seed,
                                           verbose)
        if args.export_controls:
            _export_controls(solution.control, args.export_controls, args.force)
            printv('Done. Controls written to "{}" ({} bytes).'.format(
                args.export_controls, get_filesize(args.export_controls)), verbose)
    elif command == 'study-forward':
        rows = _run_forward_study(config, verbose, timings=not args.no_timings)
        report_rates(rows, ('rel_w', 'rel_y'), verbose)
    else:
        rows = _run_control_study(config, verbose, timings=not args.no_timings)
        report_rates(rows, ('rel_L2', 'rel_H2', 'gap'), verbose)

    store(_emit(rows, args.format), args.out, args.force, verbose)
    return 0


def load_configuration(source, args, verbose):
    """Load a configuration and apply command line overrides."""
    printv('Loading the configuration "{}".'.format(source), verbose)
    config = _load_config(source)
    if args.seed is not None:
        config = config._replace(seed=args.seed)
    if args.realizations is not None:
        config = config._replace(realizations=args.realizations)
    printv('Done. {}'.format(describe(config).splitlines()[0]), verbose)
    printv('', verbose)
    return config


def describe(config):
    """Summarize a configuration in a few lines."""
    graph = config.network
    lines = [
        'Network with {} vertices, {} edges and controlled vertices {}.'.format(
            graph.vertex_count, len(graph.edges), list(graph.controlled_vertices)),
        'Scheme with {} subsets.'.format(len(config.scheme)),
        'Horizon {}, step sizes {}, max_dx {}.'.format(
            config.horizon, list(config.h), config.max_dx),
        'Control {}, target {}, alpha {}.'.format(config.control, config.target, config.alpha),
        '{} realizations from seed {}.'.format(config.realizations, config.seed),
    ]
    return '\n'.join(lines)


def report_rates(rows, metrics, verbose):
    """Print fitted convergence rates of study rows."""
    if not verbose or len({row.h for row in rows}) < 2:
        return
    for metric in metrics:
        try:
            exponent, r_squared = _rate_of(rows, metric)
        except ValueError:
            continue
        printv('Rate of {}: {:.3f} (r^2 = {:.3f})'.format(metric, exponent, r_squared), verbose)


def store(text, target, overwrite, verbose):
    """Print a document or write it to a file."""
    if target is None:
        sys.stdout.write(text)
        return
    _write_document(text, target, overwrite)
    printv('Done. Output written to "{}" ({} bytes).'.format(target, get_filesize(target)),
           verbose)


def printv(message, verbose):
    """Print or ignore the given message."""
    if verbose:
        print(message)


def get_filesize(filepath):
    """Get the size of a file in bytes."""
    return os.path.getsize(filepath)
