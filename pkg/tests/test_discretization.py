import numpy as np
import pytest

import rbmwave as rw
import shared


def cosine_initial():
    # y_x vanishes at both ends of a unit edge, compatible with free ends
    return rw.InitialCondition(rw.Expression('sin', 'x', amplitude=1.0, omega=np.pi,
                                             phase=np.pi / 2))


def test_zero_data_gives_zero_trajectory():
    graph, grids, tgrid = shared.small_setup()
    trajectory = rw.simulate_deterministic(graph, None, None, grids, tgrid)
    assert len(trajectory) == tgrid.steps + 1
    assert np.all(trajectory.values == 0.0)
    assert np.all(trajectory.y == 0.0)


def test_energy_does_not_increase():
    graph, grids, tgrid = shared.small_setup(max_dx=0.1, horizon=2.0, h=0.02)
    initial = rw.InitialCondition(y1=rw.sin(frequency=1.0, frequency_pi=1, variable='x'))
    trajectory = rw.simulate_deterministic(graph, initial, None, grids, tgrid)
    energy = rw.discrete_energy(trajectory)
    assert energy[0] > 0.0
    assert np.all(np.diff(energy) <= 1e-12 * energy[0])
    # Upwinding is dissipative
    assert energy[-1] < energy[0]


def test_degenerate_scheme_reproduces_deterministic_trajectory():
    graph, grids, tgrid = shared.small_setup()
    scheme = rw.full_scheme(graph)
    control = rw.ControlVector.from_expression(rw.sin(frequency=1.0, frequency_pi=1),
                                               graph, tgrid)
    realization = rw.sample_realization(scheme, tgrid.steps, 3)
    a = rw.simulate_deterministic(graph, None, control, grids, tgrid)
    b = rw.simulate_randomized(graph, scheme, realization, None, control, grids, tgrid)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.y, b.y)


def test_cache_shares_factorizations():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    cache = rw.OperatorCache(graph, grids, tgrid.h)
    for seed in range(5):
        realization = rw.sample_realization(scheme, tgrid.steps, seed)
        rw.simulate_randomized(graph, scheme, realization, None, None, grids, tgrid, cache)
    rw.simulate_deterministic(graph, None, None, grids, tgrid, cache)
    assert cache.factorizations <= len(scheme) + 1
    assert len(cache) == cache.factorizations

    # A subset of all edges with probability one has the deterministic speeds
    degenerate = rw.full_scheme(graph)
    assert cache.for_subset(degenerate, 1) is cache.deterministic()


def test_cache_rejects_other_grids():
    graph, grids, tgrid = shared.small_setup()
    cache = rw.OperatorCache(graph, grids, 0.1)
    with pytest.raises(ValueError):
        rw.simulate_deterministic(graph, None, None, grids, tgrid, cache)


def test_steps_satisfy_the_linear_system():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    cache = rw.OperatorCache(graph, grids, tgrid.h)
    control = rw.ControlVector.from_expression(rw.sin(2.0, 3.0), graph, tgrid)
    initial = rw.InitialCondition(y1=rw.constant(1.0, 'x'))
    realization = rw.sample_realization(scheme, tgrid.steps, 11)
    trajectory = rw.simulate_randomized(graph, scheme, realization, initial, control, grids,
                                        tgrid, cache)
    operators = cache.for_realization(scheme, realization)
    for n, operator in enumerate(operators):
        residual = operator.residual(
            trajectory.values[n], trajectory.values[n + 1], control.values[:, n + 1])
        assert residual <= 1e-10 * (1.0 + np.abs(trajectory.values[n + 1]).max())


def test_frozen_edges_hold_their_values():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    initial = rw.InitialCondition(y1=rw.constant(1.0, 'x'))
    realization = rw.sample_realization(scheme, tgrid.steps, 5)
    trajectory = rw.simulate_randomized(graph, scheme, realization, initial, None, grids,
                                        tgrid)
    layout = trajectory.layout
    for n, index in enumerate(realization.indices):
        active = scheme.subset(int(index))
        for edge in graph.edge_ids:
            before = trajectory.values[n, layout.block(edge)]
            after = trajectory.values[n + 1, layout.block(edge)]
            if edge not in active:
                assert np.array_equal(before, after)


def test_vertex_couplings_hold_in_the_solution():
    graph, grids, tgrid = shared.small_setup()
    control = rw.ControlVector.from_expression(rw.sin(1.0, 2.0), graph, tgrid)
    initial = rw.InitialCondition(y1=rw.sin(1.0, 1.0, variable='x'))
    trajectory = rw.simulate_deterministic(graph, initial, control, grids, tgrid)
    layout = trajectory.layout
    for n in (1, tgrid.steps // 2, tgrid.steps):
        x = trajectory.values[n]
        for vertex in range(1, graph.vertex_count + 1):
            incident = rw.edges_at(graph, vertex)
            outflows = {e: x[layout.outflow_index(e, s)] for e, s in incident}
            inflows = {e: x[layout.inflow_index(e, s)] for e, s in incident}
            local_speeds = {e: graph.edge(e).speed for e, _ in incident}
            signed = -control.values[0, n] if vertex in graph.controlled_vertices else 0.0
            flows = rw.NodeFlows(vertex, outflows, inflows)
            kirchhoff, continuity = rw.verify_node_conditions(flows, local_speeds, signed)
            assert kirchhoff <= 1e-10
            assert continuity <= 1e-10


def test_control_excites_the_network():
    graph, grids, tgrid = shared.small_setup(shared.load_path(), max_dx=0.1, h=0.05)
    control = rw.ControlVector.from_expression(rw.constant(1.0), graph, tgrid)
    trajectory = rw.simulate_deterministic(graph, None, control, grids, tgrid)
    assert np.abs(trajectory.values[-1]).max() > 0.1
    with pytest.raises(ValueError):
        other = rw.build_time_grid(2.0, 0.05)
        rw.simulate_deterministic(graph, None, control, grids, other)


def test_realization_length_is_checked():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    realization = rw.sample_realization(scheme, tgrid.steps + 1, 0)
    with pytest.raises(ValueError):
        rw.simulate_randomized(graph, scheme, realization, None, None, grids, tgrid)


def test_alternating_activation_on_a_path():
    graph, grids, tgrid = shared.small_setup(shared.load_path(), max_dx=0.05, h=0.01)
    scheme = rw.SubsetScheme([[1], [2]], [0.5, 0.5])
    realization = rw.realization_from_indices(scheme, [1, 2] * (tgrid.steps // 2))
    control = rw.ControlVector.from_expression(rw.constant(1.0), graph, tgrid)
    trajectory = rw.simulate_randomized(graph, scheme, realization, None, control, grids,
                                        tgrid)
    assert trajectory.realization is realization
    state = trajectory.state(tgrid.steps)
    assert set(state.w_minus) == {1, 2}
    assert state.time == pytest.approx(1.0)


def test_error_norms():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    control = rw.ControlVector.from_expression(rw.sin(1.0, 1.0, frequency_pi=1), graph, tgrid)
    reference = rw.simulate_deterministic(graph, None, control, grids, tgrid)
    assert rw.error_norms(reference, reference) == (0.0, 0.0)
    realization = rw.sample_realization(scheme, tgrid.steps, 1)
    run = rw.simulate_randomized(graph, scheme, realization, None, control, grids, tgrid)
    rel_w, rel_y = rw.error_norms(run, reference)
    assert rel_w > 0.0 and rel_y > 0.0
    zero = rw.simulate_deterministic(graph, None, None, grids, tgrid)
    with pytest.raises(rw.UndefinedRelativeError):
        rw.error_norms(run, zero)


def test_single_edge_matches_dalembert_solution():
    initial = cosine_initial()
    graph = rw.single_edge_graph(1.0, 1.0)
    horizon = 0.5
    errors = []
    for points in (40, 80, 160, 320):
        dx = 1.0 / points
        grids = rw.build_grids(graph, dx)
        tgrid = rw.build_time_grid(horizon, dx)
        trajectory = rw.simulate_deterministic(graph, initial, None, grids, tgrid)
        state = trajectory.state(tgrid.steps)
        w_minus, w_plus = rw.dalembert_single_edge(initial, 1.0, 1.0, horizon, grids[1].x)
        errors.append(max(np.abs(state.w_minus[1] - w_minus).max(),
                          np.abs(state.w_plus[1] - w_plus).max()))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all(ratios >= 1.7)
    assert np.all(ratios <= 2.3)


def test_assemble_operator_frozen_pattern():
    graph, grids, tgrid = shared.small_setup(shared.load_path())
    operator = rw.assemble_operator(graph, grids, tgrid.h, (0.0, 0.0))
    x = np.arange(float(operator.size))
    assert np.array_equal(operator.advance(x, np.zeros(1)), x)
    back, control_gradient = operator.adjoint(x)
    assert np.array_equal(back, x)
    assert control_gradient.tolist() == [0.0]
    with pytest.raises(ValueError):
        rw.assemble_operator(graph, grids, tgrid.h, (1.0, -1.0))


def test_advance_into_a_buffer():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    cache = rw.OperatorCache(graph, grids, tgrid.h)
    rng = np.random.default_rng(6)
    for operator in [cache.deterministic()] + [cache.for_subset(scheme, k) for k in (1, 2, 3, 4)]:
        x = rng.normal(size=operator.size)
        u = rng.normal(size=1)
        out = np.full(operator.size, np.nan)
        result = operator.advance(x, u, out)
        assert result is out
        assert np.array_equal(out, operator.advance(x, u))
        assert operator.residual(x, out, u) <= 1e-10 * (1.0 + np.abs(out).max())
        assert np.array_equal(out[operator.frozen], x[operator.frozen])


def test_patterns_away_from_the_controlled_vertex_ignore_the_control():
    graph, grids, tgrid = shared.small_setup()
    scheme = shared.load_diamond_scheme()
    cache = rw.OperatorCache(graph, grids, tgrid.h)
    assert cache.deterministic().uses_control
    assert cache.for_subset(scheme, 1).uses_control
    # Edges 2, 4 and 5 do not touch vertex 1
    operator = cache.for_subset(scheme, 2)
    assert not operator.uses_control
    x = np.random.default_rng(2).normal(size=operator.size)
    assert np.array_equal(operator.advance(x, np.zeros(1)), operator.advance(x, np.ones(1)))
    _, control_gradient = operator.adjoint(x)
    assert control_gradient.tolist() == [0.0]


class _Poisoned:
    def advance(self, x, u_new, out):
        out[:] = np.nan
        return out


def test_march_names_the_first_non_finite_step():
    graph, grids, tgrid = shared.small_setup(h=0.01)
    assert tgrid.steps == 100
    operator = rw.OperatorCache(graph, grids, tgrid.h).deterministic()
    x0 = np.zeros(operator.size)
    control = rw.ControlVector.zeros(graph, tgrid)
    march = rw._internal.discretization.march
    for bad in (1, 64, 70, 100):
        operators = [operator] * tgrid.steps
        operators[bad - 1] = _Poisoned()
        with pytest.raises(rw.SolverError, match='time step {} of 100'.format(bad)):
            march(operators, x0, control)
    x0[0] = np.inf
    with pytest.raises(rw.SolverError, match='time step 1 of 100'):
        march([operator] * tgrid.steps, x0, control)


def test_displacement_matches_reconstruct_y():
    graph, grids, tgrid = shared.small_setup()
    initial = rw.InitialCondition(y0=rw.sin(1.0, 1.0, variable='x'),
                                  y1=rw.constant(0.5, 'x'))
    control = rw.ControlVector.from_expression(rw.sin(1.0, 2.0), graph, tgrid)
    trajectory = rw.simulate_deterministic(graph, initial, control, grids, tgrid)
    y0 = initial.sample(grids).y0
    per_edge = rw.reconstruct_y(trajectory.states, y0, tgrid.h)
    layout = trajectory.layout
    expected = np.array([layout.join_nodes(y) for y in per_edge])
    assert np.allclose(trajectory.y, expected, rtol=1e-12, atol=1e-12)
