import json
import math

import numpy as np
import pytest

from rdtsp_bench import get_settings
from rdtsp_bench.exceptions import NTooSmall, UnknownKind
from rdtsp_bench.models import ScenarioKind, ScenarioSpec, validate_instance
from rdtsp_bench.serializers import InstanceSerializer
from rdtsp_bench.services.evaluation import threshold_components
from rdtsp_bench.services.generators import (
    LINE3_CLAMP,
    ScenarioService,
    generate_path,
    generate_scenario,
)
from rdtsp_bench.services.utils import x_of_gamma


def build(kind, n, seed=1, **params):
    return ScenarioService().build(kind, n, seed, **params)


def test_random_cities_lie_in_the_square():
    inst = build('random_cities', 100)
    x = x_of_gamma(0.99)
    assert inst.gamma == pytest.approx(0.99)
    assert inst.coords[0].tolist() == [0.0, 0.0]
    rewards = inst.coords[1:]
    assert np.all(rewards >= 0.0) and np.all(rewards <= x)
    assert inst.provenance['kind'] == 'random_cities'
    assert inst.provenance['n'] == 100
    assert inst.provenance['seed'] == 1
    assert inst.provenance['generator_version']


@pytest.mark.parametrize('kind', [kind.value for kind in ScenarioKind])
def test_generation_is_deterministic(kind):
    first = build(kind, 60, seed=42)
    second = build(kind, 60, seed=42)
    assert np.array_equal(first.dist, second.dist)
    serializer = InstanceSerializer()
    assert json.dumps(serializer.to_dict(first)) == json.dumps(serializer.to_dict(second))
    other = build(kind, 60, seed=43)
    if kind != 'circles':
        assert not np.array_equal(first.dist, other.dist)


@pytest.mark.parametrize('kind', [kind.value for kind in ScenarioKind])
@pytest.mark.parametrize('n', [3, 17, 100])
def test_every_kind_builds_a_valid_instance(kind, n):
    inst = build(kind, n, seed=n)
    assert inst.n == n
    assert inst.gamma == pytest.approx(1 - 1 / n)
    assert validate_instance(inst).ok


def test_circles_layout():
    inst = build('circles', 400)
    x = x_of_gamma(1 - 1 / 400)
    radii = np.hypot(inst.coords[1:, 0], inst.coords[1:, 1]).reshape(20, 20)
    # 20 cercles de 20 points, rayon constant par cercle
    assert np.allclose(radii, radii[:, :1])
    ratio = 1 + 400 ** -0.25
    assert np.allclose(radii[1:, 0] / radii[:-1, 0], ratio)
    assert radii[0, 0] == pytest.approx(x / 20 * ratio)


def test_circles_are_trimmed_to_n():
    inst = build('circles', 10)
    assert inst.n == 10
    radii = np.hypot(inst.coords[1:, 0], inst.coords[1:, 1])
    # 3 cercles de 4 points, les deux derniers points du troisième retirés
    steps = np.diff(radii)
    assert np.count_nonzero(steps > 1e-6) == 2
    assert [np.count_nonzero(np.isclose(radii, r)) for r in radii[[0, 4, 8]]] == [4, 4, 2]


@pytest.mark.parametrize('n', [30, 300, 999])
def test_line3_groups(n):
    inst = build('line3', n, seed=5)
    spec = ScenarioSpec('line3', n, 5)
    base, extra = divmod(n, 3)
    sizes = [base + (1 if i < extra else 0) for i in range(3)]
    rewards = inst.coords[1:]
    group1 = rewards[:sizes[0]]
    group2 = rewards[sizes[0]:sizes[0] + sizes[1]]
    group3 = rewards[sizes[0] + sizes[1]:]
    norms1 = np.hypot(group1[:, 0], group1[:, 1])
    norms2 = np.hypot(group2[:, 0], group2[:, 1])
    assert np.all(group1[:, 0] < 0)
    assert np.all(group2[:, 0] > 0)
    assert norms2.max() < norms1.min()
    assert np.all(group3[:, 1] == 0.0)
    assert np.all(group3[:, 0] <= LINE3_CLAMP * spec.x * (1 + 1e-12))
    assert np.all(np.diff(group3[:, 0]) >= 0)
    assert group3[0, 0] == pytest.approx(2 * spec.theta / 3)


def test_rural_urban_city_is_tight():
    n = 201
    inst = build('rural_urban', n, seed=9)
    spec = ScenarioSpec('rural_urban', n, 9)
    city = inst.coords[1:1 + math.ceil(n / 2)]
    offsets = np.hypot(city[:, 0] - spec.x, city[:, 1])
    assert np.all(offsets <= 10 * spec.ell)


def test_random_clusters_stay_near_the_ring():
    n = 500
    inst = build('random_clusters', n, seed=3)
    spec = ScenarioSpec('random_clusters', n, 3)
    radii = np.hypot(inst.coords[1:, 0], inst.coords[1:, 1])
    assert np.all(np.abs(radii - spec.x) <= (10 * math.sqrt(2) + 6) * spec.ell)


def test_random_clusters_jitter_parameter():
    inst = build('random_clusters', 200, seed=3, cluster_jitter=0.0, k_clusters=4)
    spec = ScenarioSpec('random_clusters', 200, 3)
    radii = np.hypot(inst.coords[1:, 0], inst.coords[1:, 1])
    assert np.all(np.abs(radii - spec.x) <= 10 * math.sqrt(2) * spec.ell + 1e-9)


def test_unknown_kind_and_small_n():
    with pytest.raises(UnknownKind):
        build('mountains', 100)
    with pytest.raises(NTooSmall):
        build('random_cities', 2)
    with pytest.raises(NTooSmall):
        generate_path(1, 1.0, seed=0)


def test_generate_scenario_records_version():
    inst = generate_scenario(ScenarioSpec('random_cities', 10, 4), generator_version='9.9')
    assert inst.provenance['generator_version'] == '9.9'


def test_direct_paths_record_version():
    assert generate_path(10, 2.0, seed=1).provenance['generator_version'] == get_settings()['generator_version']
    assert generate_path(10, 2.0, seed=1, generator_version='9.9').provenance['generator_version'] == '9.9'
    spec = ScenarioSpec('path', 10, 1)
    assert generate_scenario(spec, generator_version='9.9').provenance['generator_version'] == '9.9'


def test_path_gaps_sum_to_length():
    inst = generate_path(40, 7.5, seed=2)
    positions = inst.coords[1:, 0]
    assert inst.distance(0, 1) == 0.0
    assert np.all(np.diff(positions) > 0)
    assert positions[-1] - positions[0] == pytest.approx(7.5)
    assert x_of_gamma(inst.gamma) == pytest.approx(7.5)
    assert generate_path(40, 7.5, seed=2, gamma=0.9).gamma == 0.9


def test_path_threshold_bounds():
    n, x = 49, 10.0
    theta = x / math.sqrt(n)
    for seed in range(1000):
        inst = generate_path(n, x, seed=seed)
        gaps = np.diff(inst.coords[1:, 0])
        assert np.count_nonzero(gaps > theta) < math.sqrt(n)
        if seed % 10 == 0:
            components = threshold_components(inst, theta)
            assert len(components) <= math.floor(x / theta) + 1
