# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

import math

import numpy as np
import pytest

from displacement import analyze
from isometry import (
    FiniteOrderIsometry,
    block_rotation,
    build,
    cyclic_shift,
    order_of,
    orbit_identities,
    projector_series,
    rational_turns,
    rotation_matrix,
    signed_permutation,
    signed_permutation_matrix,
    symmetric_sandwich,
    t_series,
)
from numlin import InputError, operator_norm
from tests.unit.fixtures import SWAP

IDENTITY_TOL = 1e-12


def _isometries() -> list[FiniteOrderIsometry]:
    shifts = [cyclic_shift(m) for m in range(2, 13)]
    rotations = [block_rotation([2 * math.pi / m]) for m in range(2, 13)]
    mixed = [
        block_rotation([2 * math.pi / 3, math.pi / 2]),
        block_rotation([2 * math.pi * 5 / 12, 0.0, math.pi]),
        signed_permutation([1, 2, 0, 3], [1, -1, 1, -1]),
        signed_permutation([1, 0], [1, -1]),
    ]
    return shifts + rotations + mixed


ISOMETRIES = _isometries()


class TestBuilders:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_given_n_when_cyclic_shift_then_order_is_n(self, n):
        shift = cyclic_shift(n)

        assert shift.order == n
        assert order_of(shift.r, 24) == n

    def test_given_n_one_when_cyclic_shift_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            cyclic_shift(1)

    @pytest.mark.parametrize(
        "angles,expected_order",
        [
            pytest.param([2 * math.pi / 3], 3, id="third"),
            pytest.param([math.pi / 2, 2 * math.pi / 3], 12, id="quarter_and_third"),
            pytest.param([math.pi, 0.0], 2, id="half_and_identity"),
            pytest.param([2 * math.pi * 3 / 8], 8, id="three_eighths"),
        ],
    )
    def test_given_rational_angles_when_block_rotation_then_order_is_lcm_of_denominators(
        self, angles, expected_order
    ):
        rotation = block_rotation(angles)

        assert rotation.order == expected_order
        assert rotation.n == 2 * len(angles)

    def test_given_irrational_angle_when_block_rotation_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            block_rotation([1.0])

    def test_given_angle_when_rational_turns_then_fraction_of_full_turn_is_returned(self):
        assert rational_turns(math.pi / 3).numerator == 1
        assert rational_turns(math.pi / 3).denominator == 6

    @pytest.mark.parametrize(
        "permutation,signs,expected_order",
        [
            pytest.param([1, 0], [1, 1], 2, id="swap"),
            pytest.param([1, 0], [1, -1], 4, id="signed_swap"),
            pytest.param([0], [-1], 2, id="negation"),
            pytest.param([1, 2, 0, 3], [1, -1, 1, -1], 6, id="odd_three_cycle"),
            pytest.param([1, 2, 0, 4, 3], [1, 1, 1, 1, 1], 6, id="three_and_two_cycle"),
        ],
    )
    def test_given_signed_permutation_when_built_then_order_follows_cycle_signs(
        self, permutation, signs, expected_order
    ):
        assert signed_permutation(permutation, signs).order == expected_order

    def test_given_identity_permutation_when_signed_permutation_then_order_one_is_rejected(self):
        with pytest.raises(InputError):
            signed_permutation([0, 1], [1, 1])

    def test_given_non_permutation_when_signed_permutation_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            signed_permutation([0, 0], [1, 1])

    def test_given_wrong_order_when_finite_order_isometry_created_then_input_error_is_raised(
        self,
    ):
        with pytest.raises(InputError):
            FiniteOrderIsometry(SWAP, 4)

    def test_given_non_isometry_when_finite_order_isometry_created_then_input_error_is_raised(
        self,
    ):
        with pytest.raises(InputError):
            FiniteOrderIsometry(0.5 * SWAP, 2)

    def test_given_unknown_kind_when_build_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            build("householder", n=3)

    def test_given_identity_signed_permutation_when_matrix_built_then_order_is_one(self):
        r, order = signed_permutation_matrix([0, 1, 2], [1, 1, 1])

        assert order == 1
        np.testing.assert_array_equal(r, np.eye(3))

    def test_given_zero_angle_when_rotation_matrix_built_then_order_is_one(self):
        r, order = rotation_matrix([0.0])

        assert order == 1
        np.testing.assert_array_equal(r, np.eye(2))

    def test_given_identity_signed_permutation_when_isometry_built_then_input_error_is_raised(
        self,
    ):
        with pytest.raises(InputError):
            signed_permutation([0, 1], [1, 1])


class TestOrderOf:
    def test_given_identity_when_order_of_then_one_is_returned(self):
        assert order_of(np.eye(3), 24) == 1

    def test_given_contraction_when_order_of_then_none_is_returned(self):
        assert order_of(0.5 * np.eye(2), 24) is None

    def test_given_order_above_m_max_when_order_of_then_none_is_returned(self):
        assert order_of(cyclic_shift(7).r, 6) is None

    def test_given_m_max_below_two_when_order_of_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            order_of(SWAP, 1)


class TestOrbitFormulas:
    @pytest.fixture(autouse=True, params=ISOMETRIES, ids=lambda iso: f"n{iso.n}_m{iso.order}")
    def setUp(self, request):
        self.isometry = request.param
        self.analysis = analyze(self.isometry.r)

    def test_given_isometry_when_projector_series_then_average_of_powers_is_fixed_space_projector(
        self,
    ):
        series = projector_series(self.isometry)

        assert series.residual <= IDENTITY_TOL
        assert series.invariance_residual <= IDENTITY_TOL

    def test_given_isometry_when_t_series_then_series_is_t_and_skew(self):
        series = t_series(self.isometry, self.analysis)

        assert series.residual <= IDENTITY_TOL
        assert series.skew_residual <= IDENTITY_TOL

    def test_given_isometry_when_symmetric_sandwich_then_both_sides_agree(self):
        assert symmetric_sandwich(self.isometry, self.analysis).residual <= IDENTITY_TOL

    def test_given_isometry_when_orbit_identities_then_all_hold(self):
        residuals = orbit_identities(self.isometry)

        assert max(residuals.values()) <= IDENTITY_TOL, residuals

    def test_given_order_when_t_symmetry_checked_then_t_is_symmetric_only_for_order_two(self):
        asymmetry = operator_norm(self.analysis.t - self.analysis.t.T)

        if self.isometry.order == 2:
            assert asymmetry <= IDENTITY_TOL
        else:
            assert asymmetry > 0.01
