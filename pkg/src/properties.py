#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Monotone-operator classifiers for matrices and linear relations."""

import logging
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np

from displacement import DisplacementAnalysis, t_structure
from numlin import (
    DEFAULT_TOLERANCES,
    InputError,
    Matrix,
    PenroseResiduals,
    Tolerances,
    as_square_matrix,
    factor_fundamental,
    min_eigenvalue,
    operator_norm,
    penrose_residuals,
    subspace_distance,
    symmetric_part,
)
from relations import LinearRelation, from_matrix, inverse, relation_sum
from reports import CheckReport, evaluate

logger = logging.getLogger(__name__)

__all__ = [
    "MonotonicityReport",
    "PenroseResiduals",
    "RelationClass",
    "classify",
    "classify_relation",
    "monotone_form",
    "penrose_residuals",
    "property_suite",
]

RECTANGULAR_NOTE = "hypotheses verified (bounded + monotone); conclusion not directly tested"


@dataclass(frozen=True)
class MonotonicityReport:
    """Class to represent the monotonicity classes a square matrix belongs to."""

    nonexpansive: bool
    firmly_nonexpansive: bool
    monotone: bool
    cocoercive_half: bool
    strongly_monotone_modulus: Optional[float]
    paramonotone: bool
    residual_details: dict[str, float]


class RelationClass(NamedTuple):
    """Monotonicity of a linear relation, with the smallest eigenvalues of its forms."""

    monotone: bool
    maximal: bool
    strongly_monotone: bool
    min_form: float
    min_strong_form: float


def classify(matrix: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> MonotonicityReport:
    """Classify a square matrix M.

    Every flag is decided from one residual, kept in residual_details:
    norms exceeding 1 for the nonexpansive family, the negative part of the smallest
    eigenvalue of sym(M) for monotonicity, and ‖M·ker sym(M)‖ for paramonotonicity.
    """
    m = as_square_matrix(matrix, "M")
    identity = np.eye(m.shape[0])
    sym = symmetric_part(m)
    smallest = min_eigenvalue(sym)
    sym_kernel = factor_fundamental(sym, tol).kernel
    details = {
        "nonexpansive": max(0.0, operator_norm(m) - 1.0),
        "firmly_nonexpansive": max(0.0, operator_norm(2.0 * m - identity) - 1.0),
        "monotone": max(0.0, -smallest),
        "cocoercive_half": max(0.0, operator_norm(m - identity) - 1.0),
        "paramonotone": operator_norm(m @ sym_kernel.basis),
    }
    return MonotonicityReport(
        nonexpansive=details["nonexpansive"] <= tol.identity_tol,
        firmly_nonexpansive=details["firmly_nonexpansive"] <= tol.identity_tol,
        monotone=details["monotone"] <= tol.psd_tol,
        cocoercive_half=details["cocoercive_half"] <= tol.identity_tol,
        strongly_monotone_modulus=smallest if smallest > tol.psd_tol else None,
        paramonotone=details["paramonotone"] <= tol.identity_tol,
        residual_details=details,
    )


def monotone_form(relation: LinearRelation, beta: float = 0.0) -> Matrix:
    """Return the Gram form ½(⟨x_i, u_j − βx_j⟩ + ⟨x_j, u_i − βx_i⟩) on the graph basis."""
    x = relation.inputs
    shifted = relation.outputs - beta * x
    return symmetric_part(x.T @ shifted)


def classify_relation(
    relation: LinearRelation, beta: float = 0.0, tol: Tolerances = DEFAULT_TOLERANCES
) -> RelationClass:
    """Classify a linear relation as monotone, maximal and β-strongly monotone.

    A monotone linear relation on R^n is maximal exactly when its graph has dimension n.
    """
    if beta < 0:
        raise InputError(f"beta must be nonnegative, got {beta}")
    min_form = min_eigenvalue(monotone_form(relation))
    min_strong_form = min_eigenvalue(monotone_form(relation, beta))
    monotone = min_form >= -tol.psd_tol
    return RelationClass(
        monotone=monotone,
        maximal=monotone and relation.graph.dim == relation.ambient_dim,
        strongly_monotone=min_strong_form >= -tol.psd_tol,
        min_form=min_form,
        min_strong_form=min_strong_form,
    )


def _relation_checks(prefix: str, reference: str, relation: LinearRelation, tol: Tolerances):
    relation_class = classify_relation(relation, 0.0, tol)
    return [
        evaluate(f"{prefix}_monotone", reference, max(0.0, -relation_class.min_form), tol.psd_tol),
        evaluate(
            f"{prefix}_maximal",
            reference,
            abs(relation.graph.dim - relation.ambient_dim),
            0.0,
            note=f"graph dimension {relation.graph.dim}",
        ),
    ]


def property_suite(
    analysis: DisplacementAnalysis, tol: Optional[Tolerances] = None
) -> list[CheckReport]:
    """Check the monotonicity properties every displacement mapping has.

    Returns:
        list[CheckReport]: one report per property, ordered by check_id.
    """
    tol = tol or analysis.tol
    a = analysis
    displacement = classify(a.delta, tol)
    half = classify(0.5 * a.delta, tol)
    inverse_relation = inverse(from_matrix(a.delta))
    inverse_class = classify_relation(inverse_relation, 0.5, tol)
    a_relation = relation_sum(inverse_relation, from_matrix(-0.5 * np.eye(a.n)), tol)
    adjoint_fixed = factor_fundamental(np.eye(a.n) - a.r.T, tol).kernel
    structure = t_structure(a)
    checks = [
        evaluate(
            "properties.half_displacement_firmly_nonexpansive",
            "half-displacement-firm",
            half.residual_details["firmly_nonexpansive"],
            tol.identity_tol,
        ),
        evaluate(
            "properties.displacement_lipschitz",
            "displacement-lipschitz",
            max(0.0, operator_norm(a.delta) - 2.0),
            tol.identity_tol,
        ),
        evaluate(
            "properties.displacement_monotone",
            "displacement-monotone",
            displacement.residual_details["monotone"],
            tol.psd_tol,
        ),
        evaluate(
            "properties.displacement_cocoercive_half",
            "displacement-cocoercive",
            displacement.residual_details["cocoercive_half"],
            tol.identity_tol,
        ),
        evaluate(
            "properties.displacement_paramonotone",
            "displacement-paramonotone",
            displacement.residual_details["paramonotone"],
            tol.identity_tol,
        ),
        evaluate(
            "properties.inverse_strongly_monotone_half",
            "inverse-strongly-monotone",
            max(0.0, -inverse_class.min_strong_form),
            tol.psd_tol,
        ),
        evaluate(
            "properties.rectangular_hypotheses",
            "rectangular-hypotheses",
            max(displacement.residual_details["monotone"], max(0.0, -inverse_class.min_form)),
            tol.psd_tol,
            note=RECTANGULAR_NOTE,
        ),
        evaluate(
            "properties.fixed_space_adjoint",
            "fixed-space-adjoint",
            subspace_distance(adjoint_fixed, a.d),
            tol.identity_tol,
        ),
        evaluate(
            "properties.range_displacement",
            "range-identities",
            subspace_distance(factor_fundamental(a.delta, tol).range, a.d_perp),
            tol.identity_tol,
        ),
        evaluate(
            "properties.range_adjoint",
            "range-identities",
            structure["adjoint_range"],
            tol.identity_tol,
        ),
        evaluate(
            "properties.t_range_in_dperp",
            "t-structure",
            structure["range_in_dperp"],
            tol.identity_tol,
        ),
        evaluate(
            "properties.t_commutes_with_projector",
            "t-structure",
            max(structure["left_commutation"], structure["right_commutation"]),
            tol.identity_tol,
        ),
    ]
    checks += _relation_checks(
        "properties.displacement", "displacement-maximal", from_matrix(a.delta), tol
    )
    checks += _relation_checks(
        "properties.inverse", "displacement-maximal", inverse_relation, tol
    )
    checks += _relation_checks("properties.operator_a", "a-maximal", a_relation, tol)
    checks += _relation_checks("properties.t", "t-monotone", from_matrix(a.t), tol)
    logger.debug("Property suite produced %s checks", len(checks))
    return sorted(checks, key=lambda check: check.check_id)
