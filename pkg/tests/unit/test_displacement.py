# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

import math

import numpy as np
import pytest

from displacement import (
    NotNonexpansiveError,
    analyze,
    closed_range_bound,
    moore_penrose_from_t,
    operator_a_b,
    perturbations,
    resolvent_calculus,
    set_valued_inverse,
    t_structure,
    uniqueness_check,
)
from numlin import InputError, NumericalFailureError, UndefinedQuantityError, operator_norm
from specs import random_nonexpansive
from tests.unit.fixtures import CORPUS, CORPUS_IDS, QUARTER_TURN, SWAP, subspace_operators

ORACLE_TOL = 1e-8


class TestAnalyze:
    def test_given_swap_when_analyze_then_fixed_space_is_diagonal_and_t_vanishes(self):
        analysis = analyze(SWAP)

        assert analysis.d.dim == 1
        np.testing.assert_allclose(analysis.p_d, 0.5 * np.ones((2, 2)), atol=1e-12)
        np.testing.assert_allclose(analysis.t, np.zeros((2, 2)), atol=1e-12)
        np.testing.assert_allclose(analysis.j2t, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(analysis.inv_half, 2.0 * np.eye(2), atol=1e-12)
        assert analysis.alpha == pytest.approx(2.0)

    def test_given_quarter_turn_when_analyze_then_t_is_half_the_rotation(self):
        analysis = analyze(QUARTER_TURN)

        assert analysis.d.dim == 0
        np.testing.assert_allclose(analysis.t, 0.5 * QUARTER_TURN, atol=1e-12)
        assert analysis.alpha == pytest.approx(math.sqrt(2.0))

    def test_given_projection_onto_first_axis_when_analyze_then_t_is_half_the_other_axis(self):
        analysis = analyze(np.diag([1.0, 0.0]))

        np.testing.assert_allclose(analysis.t, np.diag([0.0, 0.5]), atol=1e-12)

    def test_given_reflection_across_diagonal_line_when_analyze_then_t_is_zero(self):
        u = np.array([1.0, 1.0]) / math.sqrt(2.0)
        reflection = 2.0 * np.outer(u, u) - np.eye(2)

        np.testing.assert_allclose(analyze(reflection).t, np.zeros((2, 2)), atol=1e-12)

    def test_given_identity_when_analyze_then_alpha_is_undefined(self):
        analysis = analyze(np.eye(3))

        assert analysis.alpha is None
        assert analysis.d.dim == 3
        np.testing.assert_allclose(analysis.t, np.zeros((3, 3)))

    def test_given_expansive_operator_when_analyze_then_not_nonexpansive_error_is_raised(self):
        with pytest.raises(NotNonexpansiveError) as e:
            analyze(2.0 * np.eye(2))

        assert e.value.norm == pytest.approx(2.0)

    def test_given_nearly_singular_displacement_when_analyze_then_numerical_failure_is_raised(
        self,
    ):
        with pytest.raises(NumericalFailureError):
            analyze(np.diag([1.0 - 1e-8, 0.0]))

    def test_given_rectangular_operator_when_analyze_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            analyze(np.ones((2, 3)))

    def test_given_analysis_when_to_dict_then_every_matrix_is_a_nested_list(self):
        payload = analyze(SWAP).to_dict()

        assert payload["fixed_space_dim"] == 1
        assert len(payload["fixed_space_basis"]) == 1
        assert operator_norm(np.array(payload["t"])) <= 1e-12
        assert set(payload) >= {"p_d", "p_dperp", "delta", "pinv_delta", "j2t", "inv_half"}


class TestDisplacementIdentities:
    @pytest.fixture(autouse=True, params=CORPUS_IDS)
    def setUp(self, request):
        self.name = request.param
        self.analysis = analyze(CORPUS[request.param])

    def test_given_operator_when_set_valued_inverse_then_relations_coincide(self):
        assert set_valued_inverse(self.analysis).residual <= ORACLE_TOL

    def test_given_operator_when_moore_penrose_from_t_then_oracle_is_matched(self):
        formula = moore_penrose_from_t(self.analysis)

        assert formula.residual <= ORACLE_TOL
        assert formula.penrose.worst <= ORACLE_TOL

    def test_given_operator_when_resolvent_calculus_then_every_identity_holds(self):
        residuals = resolvent_calculus(self.analysis).residuals

        assert max(residuals.values()) <= 1e-9, residuals

    def test_given_operator_when_t_structure_then_t_lives_on_complement_and_is_monotone(self):
        structure = t_structure(self.analysis)

        assert max(structure.values()) <= 1e-9, structure

    def test_given_operator_when_operator_a_b_then_b_is_t(self):
        decomposition = operator_a_b(self.analysis)

        assert max(decomposition.residuals.values()) <= 1e-9, decomposition.residuals
        assert decomposition.a_relation.graph.dim == self.analysis.n

    def test_given_t_when_uniqueness_check_then_candidate_is_accepted(self):
        result = uniqueness_check(self.analysis, self.analysis.t)

        assert result.accepted
        assert result.violated == ()

    def test_given_perturbed_t_when_uniqueness_check_then_every_candidate_is_rejected(self):
        candidates = perturbations(self.analysis, 20, 1e-3, seed=0)

        results = [uniqueness_check(self.analysis, candidate) for candidate in candidates]

        assert not any(result.accepted for result in results)
        assert all(result.violated for result in results)

    def test_given_operator_when_closed_range_bound_then_selection_norm_is_bounded(self):
        if self.analysis.alpha is None:
            pytest.skip("closed-range constant is undefined for R = Id")

        bound = closed_range_bound(self.analysis)

        assert bound.ok
        assert bound.lower_bound_violation <= 0.0
        assert bound.selection_residual <= ORACLE_TOL


class TestUniquenessAndBounds:
    def test_given_seed_when_perturbations_then_candidates_are_reproducible_at_fixed_distance(
        self,
    ):
        analysis = analyze(QUARTER_TURN)

        first = perturbations(analysis, 3, 1e-3, seed=7)
        second = perturbations(analysis, 3, 1e-3, seed=7)

        for candidate, again in zip(first, second):
            np.testing.assert_array_equal(candidate, again)
            assert operator_norm(candidate - analysis.t) == pytest.approx(1e-3)

    def test_given_candidate_leaving_complement_when_uniqueness_check_then_sandwich_is_violated(
        self,
    ):
        analysis = analyze(np.eye(2))

        result = uniqueness_check(analysis, np.eye(2))

        assert not result.accepted
        assert result.violated == ("sandwich",)

    def test_given_symmetric_shift_inside_complement_when_uniqueness_check_then_relation_fails(
        self,
    ):
        analysis = analyze(np.diag([1.0, 0.0]))
        g = np.array([[1.0, 2.0], [2.0, 3.0]])
        candidate = analysis.t + 1e-3 * analysis.p_dperp @ g @ analysis.p_dperp

        result = uniqueness_check(analysis, candidate)

        assert not result.accepted
        assert result.violated == ("relation",)
        assert result.sandwich_residual <= 1e-12
        assert result.distance_to_t == pytest.approx(3e-3)

    def test_given_wrong_shape_candidate_when_uniqueness_check_then_input_error_is_raised(self):
        with pytest.raises(InputError):
            uniqueness_check(analyze(SWAP), np.eye(3))

    def test_given_identity_when_closed_range_bound_then_undefined_quantity_error_is_raised(self):
        with pytest.raises(UndefinedQuantityError):
            closed_range_bound(analyze(np.eye(2)))

    def test_given_projection_when_closed_range_bound_then_bound_is_attained(self):
        bound = closed_range_bound(analyze(subspace_operators()["projection"]))

        assert bound.alpha == pytest.approx(1.0)
        assert bound.selection_norm == pytest.approx(1.0 / bound.alpha, abs=1e-9)


class TestRandomCorpusAtScale:
    def test_given_200_random_operators_when_inverse_formulas_then_oracles_are_matched(self):
        worst = {"set_valued": 0.0, "moore_penrose": 0.0, "penrose": 0.0}

        for n in (2, 4, 8, 16, 32):
            for seed in range(40):
                analysis = analyze(random_nonexpansive(n, seed, 0.95))
                formula = moore_penrose_from_t(analysis)
                worst["set_valued"] = max(
                    worst["set_valued"], set_valued_inverse(analysis).residual
                )
                worst["moore_penrose"] = max(worst["moore_penrose"], formula.residual)
                worst["penrose"] = max(worst["penrose"], formula.penrose.worst)

        assert max(worst.values()) <= ORACLE_TOL, worst
