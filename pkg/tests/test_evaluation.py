import math

import numpy as np
import pytest

from rdtsp_bench.exceptions import (
    CoordMismatch,
    EmptySubset,
    GammaOutOfRange,
    InstanceValidationError,
    InvalidShape,
    InvalidTour,
    NegativeDistance,
    NonSymmetric,
    TriangleViolation,
)
from rdtsp_bench.models import MetricInstance, RngStream, Tour, validate_instance
from rdtsp_bench.services.evaluation import (
    evaluate_prefix,
    evaluate_tour,
    evaluate_walk,
    instance_from_points,
    threshold_components,
)
from rdtsp_bench.services.utils import (
    ceil_log2,
    derive_seed,
    discount,
    gamma_of_x,
    x_of_gamma,
)


def test_evaluate_tour_sums_discounted_arrivals():
    inst = instance_from_points([(0, 0), (1, 0), (3, 0)], 0.5)
    evaluation = evaluate_tour(inst, Tour((1, 2)))
    assert evaluation.value == pytest.approx(0.5 + 0.5 ** 3)
    assert evaluation.cum_dist == (1.0, 3.0)


def test_evaluate_tour_rejects_non_permutations():
    inst = instance_from_points([(0, 0), (1, 0), (3, 0)], 0.5)
    for order in [(1, 1), (1,), (1, 3), (0, 1, 2)]:
        with pytest.raises(InvalidTour):
            evaluate_tour(inst, Tour(order))


def test_evaluate_prefix_of_empty_order_is_zero():
    inst = instance_from_points([(0, 0), (1, 0), (3, 0)], 0.5)
    assert evaluate_prefix(inst, ()).value == 0.0
    assert evaluate_prefix(inst, (2,)).value == pytest.approx(0.5 ** 3)


def test_evaluate_walk_collects_at_first_visit():
    inst = instance_from_points([(0, 0), (1, 0), (-2, 0)], 0.5)
    evaluation = evaluate_walk(inst, (0, 1, 0, 2, 1))
    assert evaluation.cum_dist == (1.0, 4.0)
    assert evaluation.value == pytest.approx(0.5 + 0.5 ** 4)


def test_evaluate_tour_uses_attached_walk():
    inst = instance_from_points([(0, 0), (1, 0), (-2, 0)], 0.5)
    direct = evaluate_tour(inst, Tour((1, 2))).value
    walked = evaluate_tour(inst, Tour((1, 2), walk=(0, 1, 0, 2))).value
    assert walked == pytest.approx(direct)
    detour = evaluate_tour(inst, Tour((1, 2), walk=(0, 1, 0, 1, 0, 2))).value
    assert detour < direct


def test_walk_must_start_at_origin_and_cover_rewards():
    inst = instance_from_points([(0, 0), (1, 0), (-2, 0)], 0.5)
    with pytest.raises(InvalidTour):
        evaluate_walk(inst, (1, 2))
    with pytest.raises(InvalidTour):
        evaluate_walk(inst, (0, 1))


def test_threshold_components_split_on_long_edges():
    inst = instance_from_points([(0, 0), (1, 0), (1.5, 0), (5, 0), (5.2, 0)], 0.5)
    components = threshold_components(inst, 1.0)
    assert components == [frozenset({1, 2}), frozenset({3, 4})]


def test_threshold_is_strict():
    inst = instance_from_points([(0, 0), (1, 0), (2, 0)], 0.5)
    assert len(threshold_components(inst, 1.0)) == 2
    assert len(threshold_components(inst, 1.0 + 1e-9)) == 1


def test_threshold_components_on_subset_and_errors():
    inst = instance_from_points([(0, 0), (1, 0), (1.5, 0), (5, 0)], 0.5)
    assert threshold_components(inst, 1.0, subset={1, 3}) == [frozenset({1}), frozenset({3})]
    with pytest.raises(EmptySubset):
        threshold_components(inst, 1.0, subset=set())
    with pytest.raises(EmptySubset):
        threshold_components(inst, 1.0, subset={7})
    with pytest.raises(ValueError):
        threshold_components(inst, 0.0)


def test_validation_accepts_euclidean_instances(make_instance):
    inst = make_instance(6, 0.9, seed=3)
    assert validate_instance(inst).ok
    assert inst.clean() is inst


def test_validation_reports_triangle_violation(triangle_matrix):
    result = validate_instance(triangle_matrix)
    assert not result.ok
    assert result.code == 'TriangleViolation'
    assert result.indices == (0, 1, 2)
    with pytest.raises(TriangleViolation) as excinfo:
        triangle_matrix.clean()
    assert excinfo.value.indices == (0, 1, 2)
    assert isinstance(excinfo.value, ValueError)


@pytest.mark.parametrize('dist, error, indices', [
    ([[0, -1], [-1, 0]], NegativeDistance, (0, 1)),
    ([[0, 1], [2, 0]], NonSymmetric, (0, 1)),
    ([[1, 1], [1, 0]], NonSymmetric, (0, 0)),
])
def test_validation_errors_carry_indices(dist, error, indices):
    inst = MetricInstance(1, 0.5, dist)
    with pytest.raises(error) as excinfo:
        inst.clean()
    assert excinfo.value.indices == indices
    assert isinstance(excinfo.value, InstanceValidationError)


def test_validation_checks_coordinates():
    inst = instance_from_points([(0, 0), (3, 4)], 0.5)
    shifted = MetricInstance(1, 0.5, [[0, 5.001], [5.001, 0]], coords=inst.coords)
    with pytest.raises(CoordMismatch):
        shifted.clean()


@pytest.mark.parametrize('gamma', [0.0, 1.0, -0.5, 1.5, float('nan')])
def test_gamma_out_of_range(gamma):
    with pytest.raises(GammaOutOfRange):
        instance_from_points([(0, 0), (1, 0)], gamma)


def test_instance_shape_errors():
    with pytest.raises(InvalidShape):
        instance_from_points([(0, 0)], 0.5)
    with pytest.raises(InvalidShape):
        MetricInstance(2, 0.5, np.zeros((2, 2)))


def test_instance_is_read_only(make_instance):
    inst = make_instance(3, 0.5, seed=1)
    with pytest.raises(ValueError):
        inst.dist[0, 1] = 7.0


def test_half_life_distance():
    assert x_of_gamma(0.5) == pytest.approx(1.0)
    assert gamma_of_x(1.0) == pytest.approx(0.5)
    gamma = 1 - 1 / 100
    assert discount(x_of_gamma(gamma), gamma) == pytest.approx(0.5)


def test_discount_flushes_underflow():
    assert discount(1e6, 0.5) == 0.0
    values = discount(np.array([0.0, 1.0, 1e6]), 0.5)
    assert values.tolist() == pytest.approx([1.0, 0.5, 0.0])
    assert values[2] == 0.0


def test_ceil_log2():
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 400, 1024)] == [0, 1, 2, 2, 3, 9, 10]


def test_derive_seed_is_stable_and_separates_cells():
    seed = derive_seed(7, 'random_cities', 100, 0, 'nn', 3)
    assert seed == derive_seed(7, 'random_cities', 100, 0, 'nn', 3)
    assert 0 <= seed < 2 ** 64
    assert seed != derive_seed(7, 'random_cities', 100, 0, 'nn', 4)
    assert seed != derive_seed(8, 'random_cities', 100, 0, 'nn', 3)


def test_rng_stream_children_are_reproducible_and_distinct():
    stream = RngStream(11)
    a = stream.child(1).generator().random(4)
    b = stream.child(1).generator().random(4)
    c = stream.child(2).generator().random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert math.isclose(float(np.mean(RngStream(5).generator().random(20000))), 0.5, abs_tol=0.02)
