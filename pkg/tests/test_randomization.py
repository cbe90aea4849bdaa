import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import rbmwave as rw
import shared


def test_diamond_probabilities_and_variances():
    graph = shared.load_diamond()
    scheme = shared.load_diamond_scheme()
    result = rw.edge_probabilities(scheme, graph)
    assert result.pi == {1: 0.25, 2: 0.5, 3: 0.5, 4: 0.5, 5: 0.5, 6: 0.5, 7: 0.25}
    assert result.var_ch[1] == pytest.approx(3.0)
    assert result.var_ch[2] == pytest.approx(1.0)
    assert result.var_ch[7] == pytest.approx(3.0)


def test_edge_probability():
    scheme = rw.SubsetScheme([[1, 2], [2], [3]], [0.2, 0.3, 0.5])
    assert rw.edge_probability(scheme, 1) == pytest.approx(0.2)
    assert rw.edge_probability(scheme, 2) == pytest.approx(0.5)
    assert rw.edge_probability(scheme, 3) == pytest.approx(0.5)
    with pytest.raises(rw.SchemeError):
        rw.edge_probability(scheme, 4)


def test_gaslib_probabilities():
    graph = shared.load_gaslib()
    scheme = rw.load_config('gaslib40-forward').scheme
    assert len(scheme) == 10
    assert all(len(subset) == 26 for subset in scheme.subsets)
    result = rw.edge_probabilities(scheme, graph)
    for pi in result.pi.values():
        assert 0.0 < pi <= 1.0


@pytest.mark.parametrize('method', ['enumerate', 'closed'])
def test_variance_methods_agree(method):
    scheme = shared.load_diamond_scheme()
    for edge in range(1, 8):
        assert rw.variance_ch(scheme, edge, 2.0, method) == pytest.approx(
            rw.variance_ch(scheme, edge, 2.0, 'closed'))


def test_mean_speed_is_unbiased():
    for graph, scheme in [
            (shared.load_diamond(), shared.load_diamond_scheme()),
            (shared.load_path(), rw.SubsetScheme([[1], [2]], [0.5, 0.5])),
            (shared.load_gaslib(), rw.load_config('gaslib40-forward').scheme)]:
        for e in graph.edges:
            mean = rw.mean_speed_check(scheme, e.id, e.speed)
            assert abs(mean - e.speed) <= 1e-12 * e.speed


def test_full_scheme_is_deterministic():
    graph = shared.load_diamond()
    scheme = rw.full_scheme(graph)
    assert len(scheme) == 1
    result = rw.edge_probabilities(scheme, graph)
    assert set(result.pi.values()) == {1.0}
    assert set(result.var_ch.values()) == {0.0}
    assert rw.pattern_speeds(scheme, graph, 1) == tuple(graph.speeds)


def test_randomized_speeds():
    graph = shared.load_diamond()
    scheme = shared.load_diamond_scheme()
    assert rw.randomized_speed(scheme, 1, 1.0, 1) == 4.0
    assert rw.randomized_speed(scheme, 1, 1.0, 2) == 0.0
    assert rw.randomized_speed(scheme, 2, 1.0, 2) == 2.0
    assert rw.pattern_speeds(scheme, graph, 4) == (0.0, 0.0, 0.0, 0.0, 2.0, 2.0, 4.0)
    for index in (0, 5, 1.5):
        with pytest.raises(ValueError):
            rw.pattern_speeds(scheme, graph, index)


@pytest.mark.parametrize(
    'subsets, probabilities',
    [
        ([[1], [2]], [0.5, 0.4]),
        ([[1], [2]], [1.2, -0.2]),
        ([[1], [2]], [0.5]),
        ([[1], []], [0.5, 0.5]),
        ([], []),
        ([[1], [0]], [0.5, 0.5]),
        ([[1], [2]], [0.5, float('nan')]),
    ]
)
def test_invalid_schemes(subsets, probabilities):
    with pytest.raises(rw.SchemeError):
        rw.SubsetScheme(subsets, probabilities)


def test_scheme_needs_every_edge():
    graph = shared.load_path()
    scheme = rw.SubsetScheme([[1], [1, 2]], [1.0, 0.0])
    with pytest.raises(rw.SchemeError):
        scheme.check_graph(graph)
    scheme = rw.SubsetScheme([[1]], [1.0])
    with pytest.raises(rw.SchemeError):
        rw.edge_probabilities(scheme, graph)
    scheme = rw.SubsetScheme([[1, 2, 3]], [1.0])
    with pytest.raises(rw.SchemeError):
        scheme.check_graph(graph)


def test_sample_realization_is_reproducible():
    scheme = shared.load_diamond_scheme()
    a = rw.sample_realization(scheme, 500, 42)
    b = rw.sample_realization(scheme, 500, 42)
    c = rw.sample_realization(scheme, 500, 43)
    assert np.array_equal(a.indices, b.indices)
    assert not np.array_equal(a.indices, c.indices)
    assert a.seed == 42
    assert a.indices.min() >= 1 and a.indices.max() <= 4
    with pytest.raises(ValueError):
        a.indices[0] = 2


def test_sample_realization_skips_zero_probability_subsets():
    scheme = rw.SubsetScheme([[1], [1, 2], [2]], [0.5, 0.0, 0.5])
    realization = rw.sample_realization(scheme, 10000, 7)
    assert 2 not in set(realization.indices.tolist())


def test_subset_frequencies():
    scheme = rw.SubsetScheme([[1], [2], [1, 2], [2]], [0.1, 0.2, 0.3, 0.4])
    draws = 100000
    realization = rw.sample_realization(scheme, draws, 2024)
    observed = np.bincount(realization.indices, minlength=5)[1:]
    expected = draws * np.array(scheme.probabilities)
    result = stats.chisquare(observed, expected)
    assert result.pvalue > 1e-3



def test_diamond_subset_frequencies():
    scheme = shared.load_diamond_scheme()
    draws = 100000
    realization = rw.sample_realization(scheme, draws, 7)
    observed = np.bincount(realization.indices, minlength=len(scheme) + 1)[1:]
    assert stats.chisquare(observed, np.full(len(scheme), draws / len(scheme))).pvalue > 1e-3
    assert np.all(np.abs(observed / draws - 0.25) <= 0.01)


@pytest.mark.parametrize('seed', [-1, 2 ** 64, 1.0, True, '3'])
def test_invalid_seeds(seed):
    scheme = shared.load_diamond_scheme()
    with pytest.raises((TypeError, ValueError)):
        rw.sample_realization(scheme, 10, seed)


def test_realization_from_indices():
    scheme = rw.SubsetScheme([[1], [2]], [0.5, 0.5])
    realization = rw.realization_from_indices(scheme, [1, 2] * 5)
    assert realization.seed is None
    assert realization.indices.tolist() == [1, 2] * 5
    for indices in ([], [0, 1], [1, 3]):
        with pytest.raises(ValueError):
            rw.realization_from_indices(scheme, indices)


@st.composite
def schemes(draw):
    edges = draw(st.integers(min_value=1, max_value=6))
    count = draw(st.integers(min_value=1, max_value=5))
    subsets = [draw(st.lists(st.integers(1, edges), min_size=1, max_size=edges, unique=True))
               for _ in range(count)]
    # Every edge in at least one subset
    subsets[0] = list(range(1, edges + 1))
    weights = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=count, max_size=count)))
    return edges, rw.SubsetScheme(subsets, (weights / weights.sum()).tolist())


@settings(max_examples=50, deadline=None)
@given(schemes(), st.floats(0.1, 10.0))
def test_unbiasedness_property(drawn, speed):
    edges, scheme = drawn
    for edge in range(1, edges + 1):
        assert rw.mean_speed_check(scheme, edge, speed) == pytest.approx(speed, rel=1e-12)
        assert rw.variance_ch(scheme, edge, speed) >= -1e-12
        assert rw.variance_ch(scheme, edge, speed) == pytest.approx(
            rw.variance_ch(scheme, edge, speed, 'closed'), rel=1e-9, abs=1e-9)
