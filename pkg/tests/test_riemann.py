import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rbmwave as rw
import shared


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
speeds = st.floats(0.05, 20.0)


@st.composite
def vertices(draw):
    degree = draw(st.integers(min_value=1, max_value=6))
    edges = list(range(1, degree + 1))
    outflows = {e: draw(finite) for e in edges}
    local_speeds = {e: draw(speeds) for e in edges}
    control = draw(finite)
    return outflows, local_speeds, control


@settings(max_examples=1000, deadline=None)
@given(vertices())
def test_node_coupling_satisfies_both_conditions(drawn):
    outflows, local_speeds, control = drawn
    total = sum(local_speeds.values())
    inflows = rw.node_coupling(3, outflows, local_speeds, total, control)
    flows = rw.NodeFlows(3, outflows, inflows)
    kirchhoff, continuity = rw.verify_node_conditions(flows, local_speeds, control)
    scale = 1.0 + max(abs(v) for v in outflows.values()) * max(local_speeds.values()) \
        + abs(control)
    assert kirchhoff <= 1e-12 * scale * len(outflows)
    assert continuity <= 1e-12 * scale * len(outflows) / min(local_speeds.values())


@given(finite)
def test_reflection_at_degree_one_vertex(out):
    inflows = rw.node_coupling(1, {4: out}, {4: 1.0}, 1.0)
    assert inflows == {4: out}


@given(finite, speeds)
def test_reflection_with_speed(out, speed):
    inflows = rw.node_coupling(1, {1: out}, {1: speed}, speed)
    assert inflows[1] == pytest.approx(out, rel=1e-14, abs=1e-12)


def test_control_enters_with_its_sign():
    # Signed control -u at a degree-1 vertex shifts the inflow by 2u/c
    inflows = rw.node_coupling(1, {1: 0.0}, {1: 2.0}, 2.0, control=-3.0)
    assert inflows[1] == pytest.approx(3.0)


def test_node_coupling_errors():
    with pytest.raises(rw.StructureError):
        rw.node_coupling(5, {}, {}, 1.0)
    with pytest.raises(ValueError):
        rw.node_coupling(5, {1: 0.0}, {2: 1.0}, 1.0)


@given(finite, finite, speeds)
def test_riemann_transform_inverts(yt, yx, speed):
    w_minus, w_plus = rw.to_riemann(yt, yx, speed)
    yt2, yx2 = rw.from_riemann(w_minus, w_plus, speed)
    assert yt2 == pytest.approx(yt, rel=1e-12, abs=1e-9)
    assert yx2 == pytest.approx(yx, rel=1e-12, abs=1e-9 / speed)


def test_riemann_transform_arrays():
    yt = np.array([1.0, 0.0])
    yx = np.array([0.0, 2.0])
    w_minus, w_plus = rw.to_riemann(yt, yx, 3.0)
    assert w_minus.tolist() == [1.0, 6.0]
    assert w_plus.tolist() == [1.0, -6.0]
    with pytest.raises(ValueError):
        rw.to_riemann(yt, yx, 0.0)


def test_initial_riemann_from_expressions():
    graph, grids, _ = shared.small_setup()
    initial = rw.InitialCondition(
        rw.sin(amplitude=2.0, frequency=1.0, frequency_pi=1, variable='x'),
        rw.constant(0.5, 'x'))
    state = rw.initial_riemann(initial, graph, grids)
    assert state.time == 0.0
    for e in graph.edges:
        x = grids[e.id].x
        slope = 2.0 * np.pi * np.cos(np.pi * x)
        assert np.allclose(state.w_minus[e.id], 0.5 + e.speed * slope)
        assert np.allclose(state.w_plus[e.id], 0.5 - e.speed * slope)


def test_initial_riemann_defaults_to_zero():
    graph, grids, _ = shared.small_setup()
    state = rw.initial_riemann(None, graph, grids)
    assert all(np.all(v == 0.0) for v in state.w_minus.values())
    assert all(np.all(v == 0.0) for v in state.w_plus.values())


def test_initial_riemann_checks_shapes():
    graph, grids, _ = shared.small_setup()
    data = rw.InitialData(
        {e: np.zeros(3) for e in graph.edge_ids},
        {e: np.zeros(3) for e in graph.edge_ids},
        {e: np.zeros(3) for e in graph.edge_ids})
    with pytest.raises(ValueError):
        rw.initial_riemann(data, graph, grids)


def test_sampled_initial_data_uses_finite_differences():
    graph, grids, _ = shared.small_setup(shared.load_path(), max_dx=0.01)
    x = np.linspace(0.0, 1.0, 101)
    y0 = rw.Expression('samples', 'x', values=x ** 2, span=(0.0, 1.0))
    data = rw.InitialCondition(y0).sample(grids)
    assert np.allclose(data.y0x[1], 2.0 * grids[1].x, atol=1e-10)


def test_reconstruct_y():
    states = [
        rw.RiemannState({1: np.zeros(2)}, {1: np.zeros(2)}, 0.0),
        rw.RiemannState({1: np.ones(2)}, {1: np.ones(2)}, 0.1),
        rw.RiemannState({1: np.full(2, 2.0)}, {1: np.zeros(2)}, 0.2),
    ]
    y = rw.reconstruct_y(states, {1: np.array([1.0, -1.0])}, 0.1)
    assert len(y) == 3
    assert np.allclose(y[0][1], [1.0, -1.0])
    assert np.allclose(y[1][1], [1.1, -0.9])
    assert np.allclose(y[2][1], [1.2, -0.8])
    with pytest.raises(ValueError):
        rw.reconstruct_y([], {}, 0.1)
