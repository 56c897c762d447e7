"""
Propriétés vérifiées par hypothesis sur de petites instances euclidiennes,
quelconques ou issues des générateurs de scénarios.
"""

from unittest import mock

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from conftest import RecordingInstance
from rdtsp_bench.models import PolicyKind, RngStream, ScenarioKind, ScenarioSpec, Tour
from rdtsp_bench.services import policies
from rdtsp_bench.services.evaluation import (
    evaluate_prefix,
    evaluate_tour,
    instance_from_points,
    threshold_components,
)
from rdtsp_bench.services.exact import held_karp, held_karp_tables
from rdtsp_bench.services.generators import generate_scenario
from rdtsp_bench.services.policies import ra, rdfs_branch, rdfs_theta, run_policy
from rdtsp_bench.services.utils import ceil_log2

coordinate = st.floats(min_value=0.0, max_value=20.0, allow_nan=False, allow_infinity=False)
gammas = st.floats(min_value=0.3, max_value=0.99)
kinds = st.sampled_from(list(PolicyKind))
travels = st.sampled_from(['shortcut', 'tree'])
seeds = st.integers(min_value=0, max_value=2 ** 32)


@st.composite
def instances(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    points = draw(st.lists(st.tuples(coordinate, coordinate), min_size=n + 1, max_size=n + 1))
    return instance_from_points(points, draw(gammas))


@st.composite
def scenario_instances(draw):
    kind = draw(st.sampled_from(list(ScenarioKind)))
    return generate_scenario(ScenarioSpec(kind, draw(st.integers(min_value=3, max_value=40)), draw(seeds)))


@st.composite
def instances_with_order(draw, max_n=12):
    inst = draw(instances(max_n=max_n))
    order = draw(st.permutations(list(inst.rewards)))
    return inst, Tour(order)


any_instances = st.one_of(instances(), scenario_instances())


@given(inst=any_instances, kind=kinds, travel=travels, seed=seeds)
@settings(max_examples=2500, deadline=None)
def test_policies_return_permutations(inst, kind, travel, seed):
    tour = run_policy(kind, inst, RngStream(seed), travel)
    assert sorted(tour.order) == list(inst.rewards)
    if tour.walk is not None:
        assert tour.walk[0] == 0
        assert set(tour.walk[1:]) == set(inst.rewards)


@given(case=instances_with_order())
@settings(max_examples=2000, deadline=None)
def test_prefix_values_grow_to_the_tour_value(case):
    inst, tour = case
    values = [evaluate_prefix(inst, tour.order[:k]).value for k in range(inst.n + 1)]
    assert values[0] == 0.0
    assert all(later >= earlier - 1e-12 for earlier, later in zip(values, values[1:]))
    assert values[-1] == evaluate_tour(inst, tour).value


@given(case=instances_with_order(), factor=st.floats(min_value=1.0, max_value=4.0))
@settings(max_examples=1500, deadline=None)
def test_stretching_distances_never_helps(case, factor):
    inst, tour = case
    stretched = instance_from_points(np.asarray(inst.coords) * factor, inst.gamma)
    assert evaluate_tour(stretched, tour).value <= evaluate_tour(inst, tour).value + 1e-12


@given(inst=any_instances, kind=kinds, travel=travels, seed=seeds)
@settings(max_examples=2000, deadline=None)
def test_policies_stay_local(inst, kind, travel, seed):
    recorder = RecordingInstance(inst)
    original = policies.LocalAgent.observe
    positions = []

    def guarded(agent):
        assert agent.collected[agent.position]
        positions.append(agent.position)
        return original(agent)

    with mock.patch.object(policies.LocalAgent, 'observe', guarded):
        run_policy(kind, recorder, RngStream(seed), travel)
    assert recorder.rows == positions
    assert recorder.rows[0] == 0


@given(inst=any_instances, kind=kinds, seed=seeds)
@settings(max_examples=2000, deadline=None)
def test_values_are_positive_and_at_most_n(inst, kind, seed):
    value = evaluate_tour(inst, run_policy(kind, inst, RngStream(seed))).value
    assert 0.0 < value <= inst.n


@given(inst=instances(min_n=2, max_n=7))
@settings(max_examples=500, deadline=None)
def test_forward_tables_cover_their_last_arrival(inst):
    tables = held_karp_tables(inst)
    defined = ~np.isnan(tables.V)
    assert np.all(tables.V[defined] >= inst.gamma ** tables.C[defined] - 1e-12)
    assert tables.value <= held_karp(inst).value + 1e-12


@given(inst=instances(max_n=8), kind=kinds, seed=seeds)
@settings(max_examples=500, deadline=None)
def test_held_karp_dominates_every_policy(inst, kind, seed):
    value = evaluate_tour(inst, run_policy(kind, inst, RngStream(seed))).value
    assert held_karp(inst).value >= value - 1e-9


@given(case=instances_with_order(), low=gammas, step=st.floats(min_value=1e-3, max_value=0.5))
@settings(max_examples=1500, deadline=None)
def test_values_grow_with_gamma(case, low, step):
    inst, tour = case
    high = min(low + step, 0.995)
    assume(high > low)
    slow = inst.with_gamma(low)
    assume(min(evaluate_tour(slow, tour).cum_dist) >= 1e-3)
    assert evaluate_tour(inst.with_gamma(high), tour).value > evaluate_tour(slow, tour).value


@given(inst=instances(min_n=1, max_n=15), theta=st.floats(min_value=0.01, max_value=30.0),
       data=st.data())
@settings(max_examples=1500, deadline=None)
def test_threshold_components_partition_the_subset(inst, theta, data):
    subset = data.draw(st.sets(st.sampled_from(list(inst.rewards)), min_size=1))
    components = threshold_components(inst, theta, subset)
    assert frozenset().union(*components) == frozenset(subset)
    assert sum(len(component) for component in components) == len(subset)
    for first, second in zip(components, components[1:]):
        assert min(first) < min(second)
    for a, first in enumerate(components):
        for second in components[a + 1:]:
            block = inst.dist[np.ix_(sorted(first), sorted(second))]
            assert np.all(block >= theta)


@given(inst=any_instances, seed=seeds)
@settings(max_examples=1500, deadline=None)
def test_ra_collects_by_distance_to_its_first_reward(inst, seed):
    order = ra(inst, RngStream(seed)).order
    distances = inst.dist[order[0], list(order[1:])]
    assert np.all(np.diff(distances) >= 0)


@given(inst=any_instances, travel=travels, data=st.data())
@settings(max_examples=1500, deadline=None)
def test_rdfs_exhausts_the_component_of_its_first_reward(inst, travel, data):
    s1 = data.draw(st.integers(min_value=1, max_value=inst.n))
    i = data.draw(st.integers(min_value=1, max_value=max(1, ceil_log2(inst.n))))
    order = rdfs_branch(inst, s1, i, travel).order
    component = next(c for c in threshold_components(inst, rdfs_theta(inst, i)) if s1 in c)
    assert order[0] == s1
    assert set(order[:len(component)]) == component
