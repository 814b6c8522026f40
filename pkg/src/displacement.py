#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Displacement mapping Id − R of a linear nonexpansive R.

`analyze` computes the fixed space D = ker(Id − R), the operator
T = P_{D⊥}(Id − R)†P_{D⊥} − ½P_{D⊥} and the resolvent matrices. Every other function
here takes the resulting `DisplacementAnalysis` and evaluates one identity of the
displacement calculus as a residual.
"""

import logging
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np

from numlin import (
    DEFAULT_TOLERANCES,
    InputError,
    Matrix,
    NumericalFailureError,
    PenroseResiduals,
    Subspace,
    Tolerances,
    UndefinedQuantityError,
    as_square_matrix,
    factor_fundamental,
    min_eigenvalue,
    operator_norm,
    penrose_residuals,
    projector,
    pseudoinverse,
    smallest_positive_singular,
    subspace_distance,
    symmetric_part,
)
from relations import (
    LinearRelation,
    apply,
    domain_range_kernelimage,
    from_matrix,
    inverse,
    normal_cone_of,
    relation_distance,
    relation_sum,
    selection_q,
)

logger = logging.getLogger(__name__)


class NotNonexpansiveError(ValueError):
    """Raised when ‖R‖ exceeds 1 + identity_tol."""

    def __init__(self, norm: float):
        super().__init__(f"operator norm {norm!r} exceeds 1, R is not nonexpansive")
        self.norm = norm


@dataclass(frozen=True, eq=False)
class DisplacementAnalysis:
    """Class to represent everything computed from one nonexpansive R."""

    r: Matrix
    n: int
    d: Subspace
    d_perp: Subspace
    p_d: Matrix
    p_dperp: Matrix
    delta: Matrix
    pinv_delta: Matrix
    t: Matrix
    alpha: Optional[float]
    j2t: Matrix
    inv_half: Matrix
    tol: Tolerances

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dict of the analysis."""
        return {
            "n": self.n,
            "r": self.r.tolist(),
            "fixed_space_dim": self.d.dim,
            "fixed_space_basis": self.d.basis.T.tolist(),
            "p_d": self.p_d.tolist(),
            "p_dperp": self.p_dperp.tolist(),
            "delta": self.delta.tolist(),
            "pinv_delta": self.pinv_delta.tolist(),
            "t": self.t.tolist(),
            "alpha": self.alpha,
            "j2t": self.j2t.tolist(),
            "inv_half": self.inv_half.tolist(),
        }


class InverseFormula(NamedTuple):
    """Both sides of the set-valued inverse identity and their graph distance."""

    lhs: LinearRelation
    rhs: LinearRelation
    residual: float


class MoorePenroseFormula(NamedTuple):
    """T + ½P_{D⊥} against the pseudoinverse oracle."""

    formula: Matrix
    oracle: Matrix
    residual: float
    penrose: PenroseResiduals


class ResolventCalculus(NamedTuple):
    """Resolvent matrices of 2T and the residuals of their identities."""

    j2t: Matrix
    inv_half: Matrix
    reflected: Matrix
    residuals: dict[str, float]


class OperatorDecomposition(NamedTuple):
    """A = (Id − R)⁻¹ − ½Id, its selection matrix B and the residuals tying them to T."""

    a_relation: LinearRelation
    b: Matrix
    residuals: dict[str, float]


@dataclass(frozen=True)
class UniquenessResult:
    """Class to represent the verdict on a candidate replacement for T."""

    accepted: bool
    relation_residual: float
    sandwich_residual: float
    distance_to_t: float
    violated: tuple[str, ...]


class ClosedRangeBound(NamedTuple):
    """Closed-range constant and the norm of the linear selection it bounds."""

    alpha: float
    selection_norm: float
    ok: bool
    lower_bound_violation: float
    selection_residual: float


def analyze(r: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> DisplacementAnalysis:
    """Compute the displacement analysis of a linear nonexpansive R.

    Args:
        r: square matrix of R.
        tol (Tolerances): thresholds for the rank cut and the invariant checks.

    Returns:
        DisplacementAnalysis: D, the projectors, T, (Id − R)†, alpha and the resolvents.

    Raises:
        NotNonexpansiveError: if ‖R‖ > 1 + identity_tol.
        NumericalFailureError: if a structural invariant of T fails.
    """
    r = as_square_matrix(r, "R")
    n = r.shape[0]
    norm = operator_norm(r)
    if norm > 1.0 + tol.identity_tol:
        logger.error("Operator norm %s exceeds 1", norm)
        raise NotNonexpansiveError(norm)
    identity = np.eye(n)
    delta = identity - r
    fundamental = factor_fundamental(delta, tol)
    d = fundamental.kernel
    p_d = projector(d)
    p_dperp = identity - p_d
    pinv_delta = pseudoinverse(delta, tol)
    t = p_dperp @ pinv_delta @ p_dperp - 0.5 * p_dperp
    analysis = DisplacementAnalysis(
        r=r,
        n=n,
        d=d,
        d_perp=d.complement(),
        p_d=p_d,
        p_dperp=p_dperp,
        delta=delta,
        pinv_delta=pinv_delta,
        t=t,
        alpha=smallest_positive_singular(delta, tol) if fundamental.rank else None,
        j2t=p_d + 0.5 * delta @ p_dperp,
        inv_half=delta + 2.0 * p_d,
        tol=tol,
    )
    _check_invariants(analysis)
    logger.info("Analyzed R on R^%s: dim D = %s, alpha = %s", n, d.dim, analysis.alpha)
    return analysis


def _check_invariants(analysis: DisplacementAnalysis) -> None:
    tol = analysis.tol
    residuals = {
        "fixed_space": operator_norm(analysis.delta @ analysis.d.basis),
        "left_commutation": operator_norm(analysis.p_dperp @ analysis.t - analysis.t),
        "right_commutation": operator_norm(analysis.t @ analysis.p_dperp - analysis.t),
    }
    psd_violation = max(0.0, -min_eigenvalue(symmetric_part(analysis.t)))
    if max(residuals.values()) > tol.identity_tol or psd_violation > tol.psd_tol:
        residuals["psd"] = psd_violation
        raise NumericalFailureError("displacement analysis violates its invariants", residuals)


def set_valued_inverse(analysis: DisplacementAnalysis) -> InverseFormula:
    """Compare (Id − R)⁻¹ with ½Id + T + N_{D⊥} as relations."""
    tol = analysis.tol
    lhs = inverse(from_matrix(analysis.delta))
    rhs = relation_sum(
        from_matrix(0.5 * np.eye(analysis.n) + analysis.t), normal_cone_of(analysis.d_perp), tol
    )
    return InverseFormula(lhs, rhs, relation_distance(lhs, rhs))


def moore_penrose_from_t(analysis: DisplacementAnalysis) -> MoorePenroseFormula:
    """Compare T + ½P_{D⊥} with the pseudoinverse of Id − R."""
    formula = analysis.t + 0.5 * analysis.p_dperp
    return MoorePenroseFormula(
        formula=formula,
        oracle=analysis.pinv_delta,
        residual=operator_norm(formula - analysis.pinv_delta),
        penrose=penrose_residuals(analysis.delta, formula),
    )


def resolvent_calculus(analysis: DisplacementAnalysis) -> ResolventCalculus:
    """Evaluate the resolvent identities of 2T.

    Returns:
        ResolventCalculus: J_{2T}, (½Id + T)⁻¹, the reflected resolvent 2J_{2T} − Id and
        a residual per identity. The last two residuals are slacks (zero when the
        inequality holds) rather than differences.
    """
    a = analysis
    identity = np.eye(a.n)
    half_shift = 0.5 * identity + a.t
    reflected = 2.0 * a.j2t - identity
    residuals = {
        "resolvent_of_2t": operator_norm((identity + 2.0 * a.t) @ a.j2t - identity),
        "inverse_of_half_shift": operator_norm(half_shift @ a.inv_half - identity),
        "inverse_is_twice_resolvent": operator_norm(a.inv_half - 2.0 * a.j2t),
        "restriction_to_dperp": operator_norm((a.inv_half - a.delta) @ a.p_dperp),
        "doubled_t": operator_norm(
            identity + 2.0 * a.t - (2.0 * a.p_dperp @ a.pinv_delta @ a.p_dperp + a.p_d)
        ),
        "projected_displacement": operator_norm(
            a.delta @ a.p_dperp + 2.0 * a.p_d - (a.delta + 2.0 * a.p_d)
        ),
        "reflected_resolvent": max(0.0, operator_norm(reflected) - 1.0),
        "half_shift_strongly_monotone": max(
            0.0, -min_eigenvalue(symmetric_part(half_shift - 0.5 * identity))
        ),
    }
    return ResolventCalculus(a.j2t, a.inv_half, reflected, residuals)


def t_structure(analysis: DisplacementAnalysis) -> dict[str, float]:
    """Return residuals of the structural properties of T.

    Keys: range_in_dperp, left_commutation, right_commutation, adjoint_range
    (ran(Id − R)ᵀ against D⊥) and monotone (negative part of the smallest eigenvalue
    of sym T).
    """
    a = analysis
    adjoint_range = factor_fundamental(a.delta.T, a.tol).range
    return {
        "range_in_dperp": operator_norm(a.p_d @ a.t),
        "left_commutation": operator_norm(a.p_dperp @ a.t - a.t),
        "right_commutation": operator_norm(a.t @ a.p_dperp - a.t),
        "adjoint_range": subspace_distance(adjoint_range, a.d_perp),
        "monotone": max(0.0, -min_eigenvalue(symmetric_part(a.t))),
    }


def operator_a_b(analysis: DisplacementAnalysis) -> OperatorDecomposition:
    """Build A = (Id − R)⁻¹ − ½Id and B, the projected minimal selection of A.

    B is assembled columnwise from the minimal selection at P_{D⊥}e_i and vanishes on D.
    """
    a = analysis
    tol = a.tol
    identity = np.eye(a.n)
    a_relation = relation_sum(inverse(from_matrix(a.delta)), from_matrix(-0.5 * identity), tol)
    b = np.zeros((a.n, a.n))
    for column in range(a.n):
        b[:, column] = a.p_dperp @ selection_q(a_relation, a.p_dperp[:, column], tol)
    spaces = domain_range_kernelimage(a_relation, tol)
    selection_residual = max(
        (apply(a_relation, d, tol).distance(b @ d) for d in a.d_perp.basis.T), default=0.0
    )
    decomposition = relation_sum(normal_cone_of(a.d_perp), from_matrix(b), tol)
    residuals = {
        "domain_is_dperp": subspace_distance(spaces.domain, a.d_perp),
        "kernel_image_is_d": subspace_distance(spaces.kernel_image, a.d),
        "decomposition": relation_distance(a_relation, decomposition),
        "b_equals_t": operator_norm(b - a.t),
        "selection": selection_residual,
    }
    return OperatorDecomposition(a_relation, b, residuals)


def uniqueness_check(
    analysis: DisplacementAnalysis, candidate: Any, tol: Optional[Tolerances] = None
) -> UniquenessResult:
    """Decide whether a candidate S can stand in for T.

    S is accepted when (Id − R)⁻¹ = ½Id + S + N_{D⊥} as relations and
    P_{D⊥}SP_{D⊥} = S, both within identity_tol. The violated conditions are named
    "relation" and "sandwich".
    """
    tol = tol or analysis.tol
    s = as_square_matrix(candidate, "candidate")
    if s.shape[0] != analysis.n:
        raise InputError(f"candidate must be {analysis.n}x{analysis.n}, got {s.shape}")
    lhs = inverse(from_matrix(analysis.delta))
    rhs = relation_sum(
        from_matrix(0.5 * np.eye(analysis.n) + s), normal_cone_of(analysis.d_perp), tol
    )
    relation_residual = relation_distance(lhs, rhs)
    sandwich_residual = operator_norm(analysis.p_dperp @ s @ analysis.p_dperp - s)
    violated = tuple(
        name
        for name, residual in (("relation", relation_residual), ("sandwich", sandwich_residual))
        if residual > tol.identity_tol
    )
    result = UniquenessResult(
        accepted=not violated,
        relation_residual=relation_residual,
        sandwich_residual=sandwich_residual,
        distance_to_t=operator_norm(s - analysis.t),
        violated=violated,
    )
    if result.accepted and result.distance_to_t > tol.identity_tol:
        logger.warning("Accepted candidate is %s away from T", result.distance_to_t)
    return result


def perturbations(
    analysis: DisplacementAnalysis, count: int, scale: float, seed: int
) -> list[Matrix]:
    """Return count seeded candidates T + scale·G/‖G‖ with G standard normal."""
    generator = np.random.Generator(np.random.PCG64(seed))
    candidates = []
    for _ in range(count):
        noise = generator.standard_normal((analysis.n, analysis.n))
        candidates.append(analysis.t + scale * noise / operator_norm(noise))
    return candidates


def closed_range_bound(analysis: DisplacementAnalysis) -> ClosedRangeBound:
    """Check the closed-range constant against the selection P_{D⊥}(Id − R)†P_{D⊥}.

    Raises:
        UndefinedQuantityError: for R = Id, where D⊥ = {0} and alpha does not exist.
    """
    a = analysis
    if a.alpha is None:
        raise UndefinedQuantityError("R = Id has no closed-range constant")
    tol = a.tol
    selection = a.p_dperp @ a.pinv_delta @ a.p_dperp
    selection_norm = operator_norm(selection)
    lower_bound_violation = 0.0
    selection_residual = 0.0
    inverse_relation = inverse(from_matrix(a.delta))
    for y in a.d_perp.basis.T:
        slack = np.linalg.norm(a.delta @ y) - (a.alpha - tol.identity_tol) * np.linalg.norm(y)
        lower_bound_violation = max(lower_bound_violation, float(-slack))
        values = apply(inverse_relation, y, tol)
        selection_residual = max(selection_residual, values.distance(selection @ y))
    return ClosedRangeBound(
        alpha=a.alpha,
        selection_norm=selection_norm,
        ok=selection_norm <= 1.0 / a.alpha + tol.identity_tol,
        lower_bound_violation=lower_bound_violation,
        selection_residual=selection_residual,
    )
