#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Verification suites run by the `verify` command."""

import logging
from typing import NamedTuple, Optional

import numpy as np

from displacement import (
    DisplacementAnalysis,
    closed_range_bound,
    moore_penrose_from_t,
    operator_a_b,
    perturbations,
    resolvent_calculus,
    set_valued_inverse,
    uniqueness_check,
)
from isometry import (
    FiniteOrderIsometry,
    order_of,
    orbit_identities,
    projector_series,
    symmetric_sandwich,
    t_series,
)
from numlin import InputError, operator_norm
from properties import property_suite
from reports import CheckReport, SkippedCheck, evaluate, sorted_checks

logger = logging.getLogger(__name__)

SUITES = ("inverse", "resolvent", "isometry", "properties")
DEFAULT_M_MAX = 24
UNIQUENESS_PERTURBATIONS = 20
PERTURBATION_SCALE = 1e-3
SYMMETRY_WITNESS = 0.01

CLOSED_RANGE_CHECKS = {
    "inverse.closed_range.lower_bound": "closed-range-constant",
    "inverse.closed_range.selection_norm": "selection-norm-bound",
    "inverse.closed_range.linear_selection": "selection-linear",
}
OPERATOR_A_CHECKS = {
    "domain_is_dperp": ("inverse.operator_a.domain", "a-domain"),
    "kernel_image_is_d": ("inverse.operator_a.kernel_image", "a-kernel-image"),
    "decomposition": ("inverse.operator_a.decomposition", "a-decomposition"),
    "b_equals_t": ("inverse.operator_a.b_equals_t", "b-equals-t"),
    "selection": ("inverse.operator_a.selection", "b-selection"),
}
RESOLVENT_CHECKS = {
    "resolvent_of_2t": "resolvent-2t",
    "inverse_of_half_shift": "half-shift-inverse-closed-form",
    "inverse_is_twice_resolvent": "half-shift-inverse",
    "restriction_to_dperp": "half-shift-inverse-restriction",
    "doubled_t": "doubled-t",
    "projected_displacement": "half-shift-inverse-closed-form",
    "reflected_resolvent": "reflected-resolvent",
    "half_shift_strongly_monotone": "half-shift-strongly-monotone",
}
ISOMETRY_CHECKS = {
    "isometry.order": "isometry-order",
    "isometry.projector_series": "orbit-projector",
    "isometry.orbit_invariance": "orbit-invariance",
    "isometry.orbit_shift_forward": "orbit-shift",
    "isometry.orbit_shift_backward": "orbit-shift",
    "isometry.orbit_symmetric": "orbit-symmetric",
    "isometry.t_series": "isometry-t-series",
    "isometry.t_skew": "isometry-t-series",
    "isometry.sandwich": "isometry-sandwich",
    "isometry.t_symmetry": "isometry-t-symmetry",
}


class SuiteOutcome(NamedTuple):
    """Checks run by a suite, sorted by check_id, and the checks it skipped."""

    checks: list[CheckReport]
    skipped: list[SkippedCheck]


def _inverse_suite(analysis: DisplacementAnalysis, seed: int) -> SuiteOutcome:
    tol = analysis.tol
    moore_penrose = moore_penrose_from_t(analysis)
    oracle_scale = max(1.0, operator_norm(moore_penrose.oracle))
    checks = [
        evaluate(
            "inverse.fixed_space",
            "fixed-space",
            operator_norm(analysis.delta @ analysis.d.basis),
            tol.identity_tol,
            note=f"dim D = {analysis.d.dim}",
        ),
        evaluate(
            "inverse.set_valued",
            "set-valued-inverse",
            set_valued_inverse(analysis).residual,
            tol.identity_tol,
        ),
        evaluate(
            "inverse.moore_penrose",
            "moore-penrose",
            moore_penrose.residual,
            tol.identity_tol * oracle_scale,
        ),
    ]
    for name, residual in moore_penrose.penrose._asdict().items():
        checks.append(
            evaluate(
                f"inverse.penrose.{name}",
                "penrose-equations",
                residual,
                tol.identity_tol * oracle_scale,
            )
        )
    decomposition = operator_a_b(analysis)
    for key, (check_id, reference) in OPERATOR_A_CHECKS.items():
        checks.append(
            evaluate(check_id, reference, decomposition.residuals[key], tol.identity_tol)
        )
    canonical = uniqueness_check(analysis, analysis.t)
    checks.append(
        evaluate(
            "inverse.uniqueness.canonical",
            "t-uniqueness",
            max(canonical.relation_residual, canonical.sandwich_residual),
            tol.identity_tol,
        )
    )
    candidates = perturbations(analysis, UNIQUENESS_PERTURBATIONS, PERTURBATION_SCALE, seed)
    verdicts = [uniqueness_check(analysis, candidate) for candidate in candidates]
    checks.append(
        evaluate(
            "inverse.uniqueness.perturbations",
            "t-uniqueness",
            sum(verdict.accepted for verdict in verdicts),
            0.0,
            note="violated: "
            + "; ".join(",".join(verdict.violated) or "none" for verdict in verdicts),
        )
    )
    if analysis.alpha is None:
        reason = "R = Id: D^perp = {0} and the closed-range constant is undefined"
        skipped = [
            SkippedCheck(check_id=check_id, reference=reference, reason=reason)
            for check_id, reference in CLOSED_RANGE_CHECKS.items()
        ]
        return SuiteOutcome(checks, skipped)
    bound = closed_range_bound(analysis)
    checks += [
        evaluate(
            "inverse.closed_range.lower_bound",
            "closed-range-constant",
            max(0.0, bound.lower_bound_violation),
            0.0,
            note=f"alpha = {bound.alpha!r}",
        ),
        evaluate(
            "inverse.closed_range.selection_norm",
            "selection-norm-bound",
            max(0.0, bound.selection_norm - 1.0 / bound.alpha),
            tol.identity_tol,
            note=f"norm {bound.selection_norm!r}, 1/alpha {1.0 / bound.alpha!r}",
        ),
        evaluate(
            "inverse.closed_range.linear_selection",
            "selection-linear",
            bound.selection_residual,
            tol.identity_tol * oracle_scale,
        ),
    ]
    return SuiteOutcome(checks, [])


def _resolvent_suite(analysis: DisplacementAnalysis) -> SuiteOutcome:
    tol = analysis.tol
    residuals = resolvent_calculus(analysis).residuals
    oracle_scale = max(1.0, operator_norm(analysis.pinv_delta))
    checks = []
    for key, reference in RESOLVENT_CHECKS.items():
        if key == "half_shift_strongly_monotone":
            bound = tol.psd_tol
        elif key == "doubled_t":
            bound = tol.identity_tol * oracle_scale
        else:
            bound = tol.identity_tol
        checks.append(evaluate(f"resolvent.{key}", reference, residuals[key], bound))
    return SuiteOutcome(checks, [])


def _skip_isometry(reason: str) -> SuiteOutcome:
    logger.info("Skipping isometry suite: %s", reason)
    return SuiteOutcome(
        [],
        [
            SkippedCheck(check_id=check_id, reference=reference, reason=reason)
            for check_id, reference in ISOMETRY_CHECKS.items()
        ],
    )


def _isometry_suite(
    analysis: DisplacementAnalysis, m_max: int, isometry: Optional[FiniteOrderIsometry]
) -> SuiteOutcome:
    tol = analysis.tol
    order = order_of(analysis.r, m_max, tol)
    if order is None:
        return _skip_isometry(f"R^m != Id for every m <= {m_max}")
    if order < 2:
        return _skip_isometry("R = Id has order 1")
    try:
        found = FiniteOrderIsometry(analysis.r, order)
    except InputError as e:
        return _skip_isometry(str(e))
    order_residual = operator_norm(np.linalg.matrix_power(found.r, order) - np.eye(found.n))
    note = f"m = {order}"
    if isometry is not None:
        order_residual = max(order_residual, float(abs(isometry.order - order)))
        note += f", structural order {isometry.order}"
    series = projector_series(found, tol)
    orbit = orbit_identities(found)
    t_check = t_series(found, analysis)
    sandwich = symmetric_sandwich(found, analysis)
    asymmetry = operator_norm(analysis.t - analysis.t.T)
    residuals = {
        "isometry.projector_series": series.residual,
        "isometry.orbit_invariance": orbit["invariance"],
        "isometry.orbit_shift_forward": orbit["shift_forward"],
        "isometry.orbit_shift_backward": orbit["shift_backward"],
        "isometry.orbit_symmetric": orbit["symmetric"],
        "isometry.t_series": t_check.residual,
        "isometry.t_skew": t_check.skew_residual,
        "isometry.sandwich": sandwich.residual,
    }
    checks = [
        evaluate("isometry.order", "isometry-order", order_residual, tol.identity_tol, note=note)
    ]
    checks += [
        evaluate(check_id, ISOMETRY_CHECKS[check_id], residual, tol.identity_tol)
        for check_id, residual in residuals.items()
    ]
    if order == 2:
        checks.append(
            evaluate("isometry.t_symmetry", "isometry-t-symmetry", asymmetry, tol.identity_tol)
        )
    else:
        checks.append(
            evaluate(
                "isometry.t_symmetry",
                "isometry-t-symmetry",
                max(0.0, SYMMETRY_WITNESS - asymmetry),
                0.0,
                note=f"m = {order}, ||T - T^T|| = {asymmetry!r} must exceed {SYMMETRY_WITNESS}",
            )
        )
    return SuiteOutcome(checks, [])


def run_suite(
    name: str,
    analysis: DisplacementAnalysis,
    seed: int = 0,
    m_max: int = DEFAULT_M_MAX,
    isometry: Optional[FiniteOrderIsometry] = None,
) -> SuiteOutcome:
    """Run one suite, or every suite for name "all".

    Args:
        name (str): "all" or one of SUITES.
        analysis (DisplacementAnalysis): the analyzed operator.
        seed (int): seed of the uniqueness perturbations.
        m_max (int): largest order searched by the isometry suite.
        isometry (FiniteOrderIsometry): structural isometry to cross-check the order against.

    Returns:
        SuiteOutcome: checks sorted by check_id and the skipped checks.
    """
    if name != "all" and name not in SUITES:
        raise InputError(f"unknown suite {name!r}, expected 'all' or one of {list(SUITES)}")
    names = SUITES if name == "all" else (name,)
    checks: list[CheckReport] = []
    skipped: list[SkippedCheck] = []
    for suite in names:
        if suite == "inverse":
            outcome = _inverse_suite(analysis, seed)
        elif suite == "resolvent":
            outcome = _resolvent_suite(analysis)
        elif suite == "isometry":
            outcome = _isometry_suite(analysis, m_max, isometry)
        else:
            outcome = SuiteOutcome(property_suite(analysis), [])
        logger.info(
            "Suite %s: %s checks, %s skipped", suite, len(outcome.checks), len(outcome.skipped)
        )
        checks += outcome.checks
        skipped += outcome.skipped
    return SuiteOutcome(
        sorted_checks(checks), sorted(skipped, key=lambda check: check.check_id)
    )
