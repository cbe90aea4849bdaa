"""This is the package :mod:`rbmwave`.

Its main purpose is to simulate and control linear wave equations on
metric graphs with the random batch method, where in every time interval
only a randomly chosen subset of edges carries waves. Beyond that it comes
with deterministic reference solvers, Monte Carlo studies, validation of
the underlying characteristic estimates and JSON/CSV I/O.

"""

__all__ = [
    # errors
    'ConfigError',
    'SchemeError',
    'SolverError',
    'StructureError',
    'UndefinedRelativeError',
    # metric graph
    'EdgeSpec',
    'MetricGraph',
    'build_incidence',
    'c_tot',
    'edges_at',
    'single_edge_graph',
    # randomization
    'EdgeProbabilities',
    'RealizationVector',
    'SubsetScheme',
    'edge_probabilities',
    'edge_probability',
    'full_scheme',
    'mean_speed_check',
    'pattern_speeds',
    'randomized_speed',
    'realization_from_indices',
    'sample_realization',
    'variance_ch',
    # expressions and grids
    'Expression',
    'EdgeGrid',
    'StateLayout',
    'TimeGrid',
    'build_grids',
    'build_time_grid',
    'constant',
    'parse_expression',
    'sin',
    'zero',
    # riemann core
    'InitialCondition',
    'InitialData',
    'NodeFlows',
    'RiemannState',
    'from_riemann',
    'initial_riemann',
    'node_coupling',
    'reconstruct_y',
    'to_riemann',
    'verify_node_conditions',
    # discretization
    'OperatorCache',
    'SystemOperator',
    'Trajectory',
    'assemble_operator',
    'discrete_energy',
    'error_norms',
    'simulate_deterministic',
    'simulate_randomized',
    # characteristics
    'CharacteristicQuery',
    'LemmaConstants',
    'LemmaReport',
    'SpeedField',
    'characteristic_lipschitz',
    'dalembert_single_edge',
    'exit_time',
    'lemma_constants',
    'randomized_field',
    'validate_lemma41',
    'validate_lemma42',
    'xi_deterministic',
    'xi_field',
    'xi_randomized',
    # optimal control
    'ControlProblem',
    'ControlVector',
    'CostBreakdown',
    'H2Metric',
    'OcpSolution',
    'OptimizerConfig',
    'compare_controls',
    'cost',
    'gradient',
    'regularization',
    'solve_ocp',
    'solve_rocp',
    # experiments and I/O
    'ExperimentConfig',
    'LemmaSettings',
    'StudyRow',
    'emit',
    'emit_reports',
    'estimate_rate',
    'export_controls',
    'export_trajectory',
    'fixture_path',
    'list_fixtures',
    'load_config',
    'load_network',
    'parse_config',
    'parse_network',
    'parse_rows',
    'parse_scheme',
    'rate_of',
    'run_control_study',
    'run_forward_study',
    'run_lemma_validation',
    'run_optimization',
    'run_simulation',
    'summarize',
    'write_document',
]

__version__ = '0.1.0'


from ._internal import (
    CharacteristicQuery, ConfigError, ControlProblem, ControlVector, CostBreakdown, EdgeGrid,
    EdgeProbabilities, EdgeSpec, ExperimentConfig, Expression, H2Metric, InitialCondition,
    InitialData, LemmaConstants, LemmaReport, LemmaSettings, MetricGraph, NodeFlows,
    OcpSolution, OperatorCache, OptimizerConfig, RealizationVector, RiemannState, SchemeError,
    SolverError, SpeedField, StateLayout, StructureError, StudyRow, SubsetScheme,
    SystemOperator, TimeGrid, Trajectory, UndefinedRelativeError, assemble_operator,
    build_grids, build_incidence, build_time_grid, c_tot, characteristic_lipschitz,
    compare_controls, constant, cost, dalembert_single_edge, discrete_energy,
    edge_probabilities, edge_probability, edges_at, emit, emit_reports, error_norms,
    estimate_rate, exit_time, export_controls, export_trajectory, fixture_path, from_riemann,
    full_scheme, gradient, initial_riemann, lemma_constants, list_fixtures, load_config,
    load_network, mean_speed_check, node_coupling, parse_config, parse_expression,
    parse_network, parse_rows, parse_scheme, pattern_speeds, randomized_field,
    randomized_speed, rate_of, realization_from_indices, reconstruct_y, regularization,
    run_control_study, run_forward_study, run_lemma_validation, run_optimization,
    run_simulation, sample_realization, simulate_deterministic, simulate_randomized, sin,
    single_edge_graph, solve_ocp, solve_rocp, summarize, to_riemann, validate_lemma41,
    validate_lemma42, variance_ch, verify_node_conditions, write_document, xi_deterministic,
    xi_field, xi_randomized, zero)
