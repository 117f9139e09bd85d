import numpy as np
import pytest

from uflkit import Instance, gamma_zero, gen_regular
from uflkit.errors import GammaOutOfRange, NotNeighbors, NumericalFailure
from uflkit.lp import ClientShares, FractionalSolution
from uflkit.sparsen import (
    check_main_lemma,
    scale_and_reassign,
    sparsen,
    split_to_complete,
)

from helpers import mixed_suite, solved, sparsened, tiny1

GAMMA0 = gamma_zero(1e-9)
GAMMAS = [1.1, 1.5, GAMMA0, 1.9]


def _primal(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return FractionalSolution(x=x, y=y, objective=0.0)


def _shares(connection, facility):
    connection = np.asarray(connection, dtype=float)
    facility = np.asarray(facility, dtype=float)
    return ClientShares(
        cost_share=connection + facility,
        connection_share=connection,
        facility_share=facility,
        facility_total=float(facility.sum()),
        connection_total=float(connection.sum()),
    )


def test_scale_fills_closest_first():
    inst = Instance(facility_costs=[1.0, 1.0], connection_costs=[[1.0], [2.0]])
    scaled = scale_and_reassign(inst, _primal([[0.5], [0.5]], [0.5, 0.5]), 1.5)
    assert np.allclose(scaled.opening, [0.75, 0.75])
    assert np.allclose(scaled.assignment[:, 0], [0.75, 0.25])


def test_scale_rejects_gamma_out_of_range():
    inst = Instance(facility_costs=[1.0], connection_costs=[[1.0]])
    primal = _primal([[1.0]], [1.0])
    with pytest.raises(GammaOutOfRange):
        scale_and_reassign(inst, primal, 2.5)
    with pytest.raises(GammaOutOfRange):
        scale_and_reassign(inst, primal, 1.0)


def test_scale_prefix_property_near_one():
    # With gamma = 1 + eps and distinct distances, weight goes to the
    # cheapest facilities whose scaled openings reach 1.
    inst = Instance(
        facility_costs=[1.0] * 4,
        connection_costs=[[1.0], [2.0], [3.0], [4.0]],
    )
    primal = _primal([[0.25]] * 4, [0.25] * 4)
    scaled = scale_and_reassign(inst, primal, 1.0 + 1e-6)
    x = scaled.assignment[:, 0]
    partial = (x > 0) & (x < scaled.opening - 1e-15)
    assert partial.sum() <= 1
    if partial.any():
        cutoff = inst.connection_costs[scaled.base_original[partial][0], 0]
        farther = inst.connection_costs[scaled.base_original, 0] > cutoff
        assert np.all(x[farther] == 0)
    assert x.sum() == pytest.approx(1.0)


def test_split_identity_when_already_complete():
    inst = Instance(facility_costs=[1.0, 1.0], connection_costs=[[1.0], [2.0]])
    scaled = scale_and_reassign(inst, _primal([[0.4], [0.6]], [0.4, 0.6]), 1.25)
    # scaled openings are 0.5 and 0.75; the client takes 0.5 and 0.5,
    # so facility 1 splits but facility 0 does not.
    sp = split_to_complete(scaled, _shares([1.5], [0.5]))
    assert np.all((sp.x_bar == 0) | (sp.x_bar == sp.opening[:, None]))


def test_split_single_client_one_split_step():
    inst = Instance(facility_costs=[1.0], connection_costs=[[1.0]])
    scaled = scale_and_reassign(inst, _primal([[1.0]], [1.0]), 1.5)
    assert np.allclose(scaled.opening, [1.5])
    assert np.allclose(scaled.assignment, [[1.0]])
    sp = split_to_complete(scaled, _shares([1.0], [1.0]))
    assert sorted(f.opening for f in sp.facilities) == pytest.approx([0.5, 1.0])
    assert all(f.original_index == 0 for f in sp.facilities)


def test_split_handles_incomplete_optimum():
    # Hand-checked: y = (0.6, 0.6), x = (0.6, 0.4), distances (1, 2),
    # gamma = 1.5.  The serving layer of facility 1 splits into a close
    # copy (0.1) and a distant copy (0.5); its non-serving layer (0.3)
    # is neither.
    inst = Instance(facility_costs=[1.0, 1.0], connection_costs=[[1.0], [2.0]])
    scaled = scale_and_reassign(inst, _primal([[0.6], [0.4]], [0.6, 0.6]), 1.5)
    sp = split_to_complete(scaled, _shares([1.4], [0.6]))
    close = sp.close_set(0)
    distant = sp.distant_set(0)
    assert sp.opening[close].sum() == pytest.approx(1.0)
    assert sp.opening[distant].sum() == pytest.approx(0.5)
    assert sp.avg_distant[0] == pytest.approx(2.0)
    assert sp.irregularity[0] == pytest.approx(1.0)
    neither = set(range(sp.num_split_facilities)) - set(close) - set(distant)
    assert sp.opening[sorted(neither)].sum() == pytest.approx(0.3)


def test_regular_instance_has_zero_irregularity():
    inst = gen_regular(4, 6, seed=2)
    sp = sparsened(inst, GAMMA0, key="regular-2")
    assert np.all(sp.irregularity <= 1e-9)
    assert np.allclose(sp.avg_close, sp.connection_share, atol=1e-6)
    assert np.allclose(sp.avg_distant, sp.connection_share, atol=1e-6)
    assert np.allclose(sp.max_close, sp.connection_share, atol=1e-6)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_invariants_on_mixed_suite(gamma):
    for idx, inst in enumerate(mixed_suite(9)):
        primal, dual, shares = solved(inst, key=f"mixed-{idx}")
        sp = sparsen(inst, primal, shares, gamma)  # construction re-checks invariants
        close_mass = np.where(sp.close_mask, sp.opening[:, None], 0).sum(axis=0)
        distant_mass = np.where(sp.distant_mask, sp.opening[:, None], 0).sum(axis=0)
        assert np.allclose(close_mass, 1.0, atol=1e-7)
        assert np.allclose(distant_mass, gamma - 1.0, atol=1e-7)
        assert np.all(sp.max_close <= sp.avg_distant + 1e-9)
        assert np.all(sp.opening > 0)
        # d(j, close U distant) equals the fractional connection cost.
        both = sp.close_mask | sp.distant_mask
        for j in range(inst.num_clients):
            d = sp.avg_distance(j, np.flatnonzero(both[:, j]))
            assert abs(d - shares.connection_share[j]) <= 1e-6


def test_merging_copies_reproduces_scaled_openings():
    for idx, inst in enumerate(mixed_suite(6)):
        primal, dual, shares = solved(inst, key=f"mixed-{idx}")
        sp = sparsen(inst, primal, shares, 1.5)
        merged = np.bincount(
            sp.original_index, weights=sp.opening, minlength=inst.num_facilities
        )
        assert np.allclose(merged, 1.5 * primal.y, atol=1e-9)


def test_main_lemma_trivial_for_same_client():
    sp = sparsened(tiny1(), GAMMA0, key="tiny1")
    assert check_main_lemma(sp, 0, 0)


def test_main_lemma_rejects_non_neighbors():
    inst = Instance(
        facility_costs=[1.0, 1.0],
        connection_costs=[[0.1, 10.0], [10.0, 0.1]],
    )
    primal, dual, shares = solved(inst, key="two-islands")
    sp = sparsen(inst, primal, shares, 1.5)
    with pytest.raises(NotNeighbors):
        check_main_lemma(sp, 0, 1)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_main_lemma_holds_on_all_neighbor_pairs(gamma):
    for idx, inst in enumerate(mixed_suite(9)):
        primal, dual, shares = solved(inst, key=f"mixed-{idx}")
        sp = sparsen(inst, primal, shares, gamma)
        n = inst.num_clients
        for j in range(n):
            for j2 in range(n):
                if j != j2 and sp.are_neighbors(j, j2):
                    assert check_main_lemma(sp, j, j2)
