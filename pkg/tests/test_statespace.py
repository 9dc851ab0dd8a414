import math

import numpy as np
import pytest

from slitstrip.geometry import GeometryError, make_geometry
from slitstrip.statespace import (BETA, fold_involution, full_spins, half_horizontal_weights,
                                  lift_boundary_function, ones,
                                  oracle_partition_and_correlations, v_spins)
from slitstrip.transfer import TransferOperator


G2 = make_geometry(-1, 1)


def _row(spins):
    return sum(1 << j for j, s in enumerate(spins) if s > 0)


def test_critical_coupling_value():
    assert BETA == pytest.approx(0.4406867935097715, abs=1e-15)


def test_rows_of_v_have_plus_spin_at_b():
    assert np.all(v_spins(G2)[:, -1] == 1)
    assert full_spins(G2).shape == (8, 3)


def test_fold_flips_sites_left_of_dual_site():
    assert fold_involution(G2, _row((1, 1, 1)), 1) == _row((-1, -1, 1))
    assert fold_involution(G2, _row((-1, -1, 1)), -1) == _row((1, -1, 1))
    for row in range(8):
        for x2 in G2.dual_sites:
            assert fold_involution(G2, fold_involution(G2, row, x2), x2) == row


def test_lift_of_constant_function_at_all_plus_row():
    vec = lift_boundary_function(G2, ones)
    assert vec[_row((1, 1, 1))] == pytest.approx(math.exp(BETA))


def test_lift_of_indicator_is_one_weighted_basis_vector():
    ind = np.zeros(8)
    ind[5] = 1.0
    vec = lift_boundary_function(G2, ind)
    c = half_horizontal_weights(G2)
    assert np.count_nonzero(vec) == 1 and vec[5] == c[5]


def test_norm_of_lifted_constant_sums_squared_weights():
    v = lift_boundary_function(G2, ones, space="v")
    c = half_horizontal_weights(G2, "v")
    assert v @ v == pytest.approx(np.sum(c ** 2), rel=1e-15)


@pytest.mark.parametrize("slit", [False, True])
def test_enumeration_matches_transfer_product(slit):
    ref = oracle_partition_and_correlations(G2, 1, 1, slit)
    top = TransferOperator(G2)
    bottom = TransferOperator(G2, slit=True) if slit else top
    one = lift_boundary_function(G2, ones)
    z = one @ top.apply(bottom.apply(one))
    assert z == pytest.approx(ref.partition_function, rel=1e-12)


def test_single_spin_expectation_vanishes():
    ref = oracle_partition_and_correlations(G2, 1, 1, spins=[((0, 0),)])
    assert abs(ref.correlations[((0, 0),)]) < 1e-14


def test_enumeration_refuses_large_lattices():
    with pytest.raises(GeometryError, match="cap"):
        oracle_partition_and_correlations(make_geometry(-3, 3), 2, 2)
