import numpy as np
import pytest

from uflkit import Instance, brute_force_opt, client_shares, solve_relaxation
from uflkit.errors import InfeasibleInput

from helpers import box_instance, cycle_gadget, mixed_suite, solved, tiny1


def test_one_by_one_instance():
    inst = Instance(facility_costs=[2.0], connection_costs=[[3.0]])
    primal, dual = solve_relaxation(inst)
    assert primal.objective == pytest.approx(5.0)
    assert primal.y[0] == pytest.approx(1.0)
    assert primal.x[0, 0] == pytest.approx(1.0)
    assert dual.objective == pytest.approx(5.0)


def test_lp_lower_bounds_tiny1_optimum():
    primal, _ = solve_relaxation(tiny1())
    assert primal.objective <= 4.0 + 1e-9


def test_free_facilities_give_min_distance_objective():
    rng = np.random.default_rng(11)
    c = rng.random((4, 6))
    inst = Instance(facility_costs=np.zeros(4), connection_costs=c)
    primal, _ = solve_relaxation(inst)
    assert primal.objective == pytest.approx(c.min(axis=0).sum(), abs=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_primal_dual_feasibility_and_gap(seed):
    inst = mixed_suite(6)[seed]
    primal, dual = solve_relaxation(inst)
    assert np.allclose(primal.x.sum(axis=0), 1.0, atol=1e-7)
    assert np.all(primal.x <= primal.y[:, None] + 1e-9)
    assert np.all(primal.x >= 0) and np.all(primal.y >= 0)
    assert np.all(dual.w >= 0)
    assert np.all(dual.w.sum(axis=1) <= inst.facility_costs + 1e-7)
    assert np.all(dual.v[None, :] - dual.w <= inst.connection_costs + 1e-7)
    gap = abs(primal.objective - dual.objective)
    assert gap <= 1e-7 * max(1.0, primal.objective)


@pytest.mark.parametrize("seed", range(6))
def test_complementary_slackness_diagnostic(seed):
    inst = mixed_suite(6)[seed]
    primal, dual = solve_relaxation(inst)
    support = primal.x > 1e-6
    slack = dual.v[None, :] - dual.w - inst.connection_costs
    assert np.all(slack[support] >= -1e-5)


@pytest.mark.parametrize("seed", range(8))
def test_lp_lower_bounds_ip_optimum(seed):
    inst = box_instance(seed) if seed % 2 else cycle_gadget(5, seed)
    primal, _ = solve_relaxation(inst)
    opt = brute_force_opt(inst)
    assert primal.objective <= opt.total_cost + 1e-7


def test_client_shares_one_by_one():
    inst = Instance(facility_costs=[2.0], connection_costs=[[3.0]])
    primal, dual = solve_relaxation(inst)
    shares = client_shares(inst, primal, dual)
    assert shares.connection_share[0] == pytest.approx(3.0)
    assert shares.facility_share[0] == pytest.approx(2.0)
    assert shares.cost_share[0] == pytest.approx(5.0)


def test_client_shares_zero_facility_cost():
    rng = np.random.default_rng(5)
    inst = Instance(facility_costs=np.zeros(3), connection_costs=rng.random((3, 5)))
    primal, dual = solve_relaxation(inst)
    shares = client_shares(inst, primal, dual)
    assert np.all(np.abs(shares.facility_share) <= 1e-7)


def test_client_shares_sum_to_objective():
    inst = tiny1()
    primal, dual, shares = solved(inst, key="tiny1")
    assert shares.cost_share.sum() == pytest.approx(primal.objective, rel=1e-6)
    assert shares.facility_total + shares.connection_total == pytest.approx(
        primal.objective, rel=1e-6
    )
    assert np.all(shares.facility_share >= -1e-7)


def test_client_shares_rejects_mismatched_pair():
    inst = tiny1()
    primal, dual = solve_relaxation(inst)
    other = Instance(facility_costs=[9.0, 9.0, 9.0], connection_costs=inst.connection_costs * 3)
    other_primal, other_dual = solve_relaxation(other)
    with pytest.raises(InfeasibleInput):
        client_shares(inst, primal, other_dual)
