import itertools

import numpy as np
import pytest

from uflkit import Instance, gen_euclidean, is_metric, nearest_assignment, validate
from uflkit.errors import EmptyDimension, EmptyOpenSet, NegativeCost, NonFiniteEntry

from helpers import tiny1


def test_validate_minimal_instance():
    validate(Instance(facility_costs=[2.0], connection_costs=[[3.0]]))


def test_validate_negative_cost():
    with pytest.raises(NegativeCost):
        validate(Instance(facility_costs=[-1.0], connection_costs=[[0.0]]))
    with pytest.raises(NegativeCost):
        validate(Instance(facility_costs=[1.0], connection_costs=[[-0.5]]))


def test_validate_empty_dimension():
    with pytest.raises(EmptyDimension):
        validate(Instance(facility_costs=[], connection_costs=[]))
    with pytest.raises(EmptyDimension):
        validate(Instance(facility_costs=[1.0], connection_costs=[[]]))


def test_validate_non_finite():
    with pytest.raises(NonFiniteEntry):
        validate(Instance(facility_costs=[np.inf], connection_costs=[[1.0]]))
    with pytest.raises(NonFiniteEntry):
        validate(Instance(facility_costs=[1.0], connection_costs=[[np.nan]]))


def test_instance_is_immutable():
    inst = tiny1()
    with pytest.raises(ValueError):
        inst.facility_costs[0] = 5.0


@pytest.mark.parametrize("seed", range(5))
def test_euclidean_instances_are_metric(seed):
    assert is_metric(gen_euclidean(5, 8, (0.1, 1.0), seed))


def test_constructed_metric_violation():
    inst = Instance(facility_costs=[1.0, 1.0], connection_costs=[[10.0, 1.0], [1.0, 1.0]])
    assert not is_metric(inst)


def test_single_facility_is_always_metric():
    rng = np.random.default_rng(3)
    inst = Instance(facility_costs=[1.0], connection_costs=rng.random((1, 3)))
    assert is_metric(inst)


def test_nearest_assignment_single_open_facility():
    inst = tiny1()
    sol = nearest_assignment(inst, [0])
    assert list(sol.assignment) == [0, 0, 0, 0]
    assert sol.connection_cost == pytest.approx(inst.connection_costs[0].sum())
    assert sol.facility_cost == pytest.approx(1.0)


def test_nearest_assignment_tiny1_oracle():
    # Oracle: enumerate every total assignment to {0, 2} by hand.
    inst = tiny1()
    best = min(
        sum(inst.connection_costs[i, j] for j, i in enumerate(pick))
        for pick in itertools.product([0, 2], repeat=4)
    )
    sol = nearest_assignment(inst, [0, 2])
    assert sol.connection_cost == pytest.approx(best)
    assert sol.total_cost == pytest.approx(4.0)


def test_nearest_assignment_empty_open_set():
    with pytest.raises(EmptyOpenSet):
        nearest_assignment(tiny1(), [])


def test_nearest_assignment_tie_breaks_to_lowest_index():
    inst = Instance(facility_costs=[1.0, 1.0], connection_costs=[[2.0], [2.0]])
    sol = nearest_assignment(inst, [0, 1])
    assert sol.assignment[0] == 0


@pytest.mark.parametrize("seed", range(4))
def test_nearest_assignment_beats_random_assignments(seed):
    rng = np.random.default_rng(seed)
    inst = gen_euclidean(6, 9, (0.1, 1.0), seed)
    open_set = sorted(rng.choice(6, size=3, replace=False))
    sol = nearest_assignment(inst, open_set)
    for _ in range(50):
        assignment = rng.choice(open_set, size=9)
        random_cost = inst.connection_costs[assignment, np.arange(9)].sum()
        assert sol.connection_cost <= random_cost + 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_adding_facility_never_increases_connection_cost(seed):
    inst = gen_euclidean(6, 9, (0.1, 1.0), seed)
    open_set = [1, 4]
    base = nearest_assignment(inst, open_set)
    for extra in range(6):
        bigger = nearest_assignment(inst, set(open_set) | {extra})
        assert bigger.connection_cost <= base.connection_cost + 1e-12
