import math

import numpy as np
import pytest

import rbmwave as rw
import shared


def test_speed_field():
    field = rw.SpeedField([0.0, 1.0, 2.0], [1.0, 3.0])
    assert field.antiderivative(1.5) == pytest.approx(2.5)
    assert field.integral(0.5, 2.0) == pytest.approx(3.5)
    assert field.last_time_below(2.5, 2.0) == pytest.approx(1.5)
    assert field.last_time_below(10.0, 2.0) == 2.0
    assert field.last_time_below(-1.0, 2.0) is None
    with pytest.raises(ValueError):
        field.antiderivative(2.5)


@pytest.mark.parametrize(
    'breakpoints, values',
    [
        ([0.0], []),
        ([0.0, 1.0, 0.5], [1.0, 1.0]),
        ([0.0, 1.0], [1.0, 2.0]),
        ([0.0, 1.0], [-1.0]),
        ([0.0, 1.0], [float('inf')]),
    ]
)
def test_invalid_speed_fields(breakpoints, values):
    with pytest.raises(ValueError):
        rw.SpeedField(breakpoints, values)


def test_xi_deterministic():
    query = rw.CharacteristicQuery(1, '+', 1.0, 0.5, 0.25)
    assert rw.xi_deterministic(query, 2.0) == pytest.approx(-1.0)
    query = query._replace(sign='-')
    assert rw.xi_deterministic(query, 2.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        rw.xi_deterministic(query._replace(s=1.5), 2.0)
    with pytest.raises(ValueError):
        rw.xi_deterministic(query._replace(sign='*'), 2.0)


def test_xi_randomized_on_alternating_subsets():
    scheme = rw.SubsetScheme([[1], [2]], [0.5, 0.5])
    realization = rw.realization_from_indices(scheme, [1, 2, 1, 2])
    tgrid = rw.build_time_grid(1.0, 0.25)
    query = rw.CharacteristicQuery(1, '+', 1.0, 0.5, 0.0)
    # Edge 1 moves with speed 2 in half of the steps, like the deterministic speed 1
    assert rw.xi_randomized(query, scheme, realization, tgrid, 1.0) == pytest.approx(
        rw.xi_deterministic(query, 1.0))
    query = query._replace(s=0.25)
    assert rw.xi_randomized(query, scheme, realization, tgrid, 1.0) == pytest.approx(0.0)
    assert rw.xi_deterministic(query, 1.0) == pytest.approx(-0.25)

    field = rw.randomized_field(scheme, realization, tgrid, 2, 1.0)
    assert field.values.tolist() == [0.0, 2.0, 0.0, 2.0]
    with pytest.raises(ValueError):
        rw.randomized_field(scheme, realization, rw.build_time_grid(1.0, 0.5), 1, 1.0)


@pytest.mark.parametrize('edge, sign', [(1, '+'), (2, '-'), (7, '+')])
def test_randomized_foot_is_unbiased(edge, sign):
    scheme = shared.load_diamond_scheme()
    tgrid = rw.build_time_grid(1.0, 0.02)
    query = rw.CharacteristicQuery(edge, sign, 1.0, 0.5, 0.2)
    feet = np.array([
        rw.xi_randomized(query, scheme, rw.sample_realization(scheme, tgrid.steps, seed),
                         tgrid, 1.0)
        for seed in range(2000)])
    error = feet.std(ddof=1) / np.sqrt(feet.size)
    assert error > 0.0
    assert abs(feet.mean() - rw.xi_deterministic(query, 1.0)) <= 4.0 * error


def test_randomized_paths_are_lipschitz():
    graph = shared.load_diamond()
    scheme = shared.load_diamond_scheme()
    lipschitz = rw.characteristic_lipschitz(scheme, graph)
    tgrid = rw.build_time_grid(1.0, 0.05)
    rng = np.random.default_rng(5)
    steepest = 0.0
    for seed in range(20):
        realization = rw.sample_realization(scheme, tgrid.steps, seed)
        for e in graph.edges:
            field = rw.randomized_field(scheme, realization, tgrid, e.id, e.speed)
            times = np.sort(rng.uniform(0.0, 1.0, size=(30, 2)), axis=1)
            for s1, s2 in times:
                query = rw.CharacteristicQuery(e.id, '+', 1.0, 0.5, s1)
                gap = abs(rw.xi_field(query, field) - rw.xi_field(query._replace(s=s2), field))
                assert gap <= lipschitz * (s2 - s1) * (1 + 1e-12) + 1e-15
                if s2 > s1:
                    steepest = max(steepest, gap / (s2 - s1))
    # Attained inside an active step of edge 1 or 7
    assert steepest == pytest.approx(lipschitz, rel=1e-9)


def test_exit_time():
    query = rw.CharacteristicQuery(1, '+', 1.0, 0.5, 0.0)
    assert rw.exit_time(query, 1.0, 1.0) == pytest.approx(0.5)
    assert rw.exit_time(query, 1.0, 1.0, floor=0.7) == pytest.approx(0.7)
    assert rw.exit_time(query._replace(sign='-', x=0.75), 1.0, 1.0) == pytest.approx(0.75)

    # Stays inside the edge
    early = query._replace(t=0.3)
    assert rw.exit_time(early, 1.0, 1.0) is None
    assert rw.exit_time(early, 1.0, 1.0, floor=0.1) == 0.1

    # Frozen in the second half, so the exit happens before the freeze
    field = rw.SpeedField([0.0, 0.5, 1.0], [2.0, 0.0])
    assert rw.exit_time(query, field, 1.0) == pytest.approx(0.25)


def test_lemma_constants():
    graph = shared.load_diamond()
    constants = rw.lemma_constants(shared.load_diamond_scheme(), graph)
    assert constants.c0 == pytest.approx(3.0)
    assert constants.c1 == pytest.approx(81.0)
    assert constants.c2 == pytest.approx(1.5 * math.sqrt(162.0))
    assert rw.characteristic_lipschitz(shared.load_diamond_scheme(), graph) == 4.0

    constants = rw.lemma_constants(rw.full_scheme(graph), graph)
    assert constants == (1.0, 0.0, 0.0)


def test_mean_square_deviation():
    scheme = shared.load_diamond_scheme()
    coarse = rw.validate_lemma41(scheme, 1, 1.0, 0.0, 1.0, 0.02, 10000, 1)
    fine = rw.validate_lemma41(scheme, 1, 1.0, 0.0, 1.0, 0.005, 10000, 2)
    for report in (coarse, fine):
        assert report.lemma == 'mean-square'
        assert report.passed
        assert report.margin == pytest.approx(report.bound - report.lhs_estimate)
        # The deviation is a sum of independent steps, so the bound is attained on average
        assert report.lhs_estimate == pytest.approx(report.bound, rel=0.1)
        assert math.isnan(report.ratio)
    assert coarse.bound == pytest.approx(0.06)
    assert 3.0 <= coarse.lhs_estimate / fine.lhs_estimate <= 5.0


def test_mean_square_deviation_vanishes_for_full_scheme():
    graph = shared.load_diamond()
    report = rw.validate_lemma41(rw.full_scheme(graph), 2, 1.0, 0.0, 1.0, 0.02, 1000, 0,
                                 graph=graph)
    assert report.lhs_estimate == pytest.approx(0.0, abs=1e-20)
    assert report.bound == 0.0


@pytest.mark.parametrize(
    'kwargs',
    [
        dict(samples=999),
        dict(h=0.03),
        dict(s=1.0),
        dict(seed=-1),
        dict(speed=0.0),
    ]
)
def test_mean_square_deviation_arguments(kwargs):
    arguments = dict(scheme=shared.load_diamond_scheme(), edge=1, speed=1.0, s=0.0, t=1.0,
                     h=0.02, samples=1000, seed=0)
    arguments.update(kwargs)
    with pytest.raises(ValueError):
        rw.validate_lemma41(**arguments)


@pytest.mark.parametrize('edge', [1, 2])
@pytest.mark.parametrize('sign', ['+', '-'])
def test_exit_time_deviation(edge, sign):
    scheme = shared.load_diamond_scheme()
    report = rw.validate_lemma42(scheme, edge, 1.0, 0.5, 1.0, 0.02, 10000, 3, sign=sign)
    assert report.lemma == 'exit-time'
    assert report.lhs_estimate > 0.0
    assert report.passed
    assert report.ratio >= 2.0
    assert math.isnan(report.fourth_moment)


def test_exit_time_deviation_arguments():
    scheme = shared.load_diamond_scheme()
    with pytest.raises(ValueError):
        rw.validate_lemma42(scheme, 1, 1.0, 1.0, 1.0, 0.02, 1000, 0)
    with pytest.raises(ValueError):
        rw.validate_lemma42(scheme, 1, 1.0, 0.5, 1.0, 0.3, 1000, 0)
    with pytest.raises(ValueError):
        rw.validate_lemma42(scheme, 1, 1.0, 0.5, 1.0, 0.02, 1000, 0, sign='x')


def test_dalembert_constant_velocity():
    initial = rw.InitialCondition(y1=rw.constant(1.0, 'x'))
    w_minus, w_plus = rw.dalembert_single_edge(initial, 1.0, 1.0, 3.7, [0.0, 0.4, 1.0])
    assert w_minus.tolist() == [1.0, 1.0, 1.0]
    assert w_plus.tolist() == [1.0, 1.0, 1.0]


def test_dalembert_boundary_control():
    initial = rw.InitialCondition(y1=rw.constant(1.0, 'x'))
    w_minus, w_plus = rw.dalembert_single_edge(
        initial, 1.0, 1.0, 0.5, 0.25, control_start=rw.constant(0.5))
    assert w_minus == pytest.approx(1.0)
    assert w_plus == pytest.approx(2.0)


def test_dalembert_arguments():
    initial = rw.InitialCondition()
    with pytest.raises(ValueError):
        rw.dalembert_single_edge(initial, 1.0, 1.0, 0.5, [1.5])
    with pytest.raises(ValueError):
        rw.dalembert_single_edge(initial, 1.0, 1.0, -0.5, 0.0)
    sampled = rw.InitialCondition(rw.Expression('samples', 'x', values=[0.0, 1.0],
                                                span=(0.0, 1.0)))
    with pytest.raises(ValueError):
        rw.dalembert_single_edge(sampled, 1.0, 1.0, 0.5, 0.0)
