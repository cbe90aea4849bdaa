"""This is a subpackage used to hide all implementation details from the user."""

from .characteristics import (
    CharacteristicQuery, LemmaConstants, LemmaReport, SpeedField, characteristic_lipschitz,
    dalembert_single_edge, exit_time, lemma_constants, randomized_field, validate_lemma41,
    validate_lemma42, xi_deterministic, xi_field, xi_randomized)
from .controls import ControlVector, H2Metric, regularization
from .discretization import (
    OperatorCache, SystemOperator, Trajectory, assemble_operator, discrete_energy, error_norms,
    simulate_deterministic, simulate_randomized)
from .errors import (
    ConfigError, SchemeError, SolverError, StructureError, UndefinedRelativeError)
from .experiments import (
    ExperimentConfig, LemmaSettings, StudyRow, estimate_rate, rate_of, run_control_study,
    run_forward_study, run_lemma_validation, run_optimization, run_simulation, summarize)
from .expressions import Expression, constant, parse_expression, sin, zero
from .graph import EdgeSpec, MetricGraph, build_incidence, c_tot, edges_at, single_edge_graph
from .grids import EdgeGrid, StateLayout, TimeGrid, build_grids, build_time_grid
from .io import (
    emit, emit_reports, export_controls, export_trajectory, fixture_path, list_fixtures,
    load_config, load_network, parse_config, parse_network, parse_rows, parse_scheme,
    write_document)
from .optimization import (
    ControlProblem, CostBreakdown, OcpSolution, OptimizerConfig, compare_controls, cost,
    gradient, solve_ocp, solve_rocp)
from .randomization import (
    EdgeProbabilities, RealizationVector, SubsetScheme, edge_probabilities, edge_probability,
    full_scheme, mean_speed_check, pattern_speeds, randomized_speed, realization_from_indices,
    sample_realization, variance_ch)
from .riemann import (
    InitialCondition, InitialData, NodeFlows, RiemannState, from_riemann, initial_riemann,
    node_coupling, reconstruct_y, to_riemann, verify_node_conditions)
