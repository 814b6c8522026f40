#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Worked examples: R = ±P_U, R = ±R_U and cyclic shifts, checked against closed forms."""

import logging
from typing import Callable, NamedTuple

import numpy as np

from displacement import DisplacementAnalysis, analyze
from isometry import cyclic_shift
from numlin import (
    DEFAULT_TOLERANCES,
    InputError,
    Matrix,
    Subspace,
    Tolerances,
    factor_fundamental,
    operator_norm,
    projector,
    subspace_distance,
)
from relations import (
    LinearRelation,
    from_matrix,
    inverse,
    normal_cone_of,
    relation_distance,
    relation_sum,
)
from reports import CheckReport, Discrepancy, GalleryBlock, GalleryDocument, evaluate
from specs import random_subspace_basis
from suites import run_suite

logger = logging.getLogger(__name__)

GALLERY_TOL = 1e-12
SHIFT_ORDERS = range(2, 9)


class ClosedForms(NamedTuple):
    """Expected objects of one subspace example, built from U."""

    reference: str
    operator: Callable[[Matrix, Matrix], Matrix]
    fixed_space: Callable[[Subspace], Subspace]
    displacement: Callable[[Matrix, Matrix], Matrix]
    range: Callable[[Subspace], Subspace]
    inverse: Callable[[Matrix, Subspace], LinearRelation]
    t: Callable[[Matrix, Matrix], Matrix]


def _plus_normal_cone(matrix: Matrix, subspace: Subspace) -> LinearRelation:
    return relation_sum(from_matrix(matrix), normal_cone_of(subspace))


# Each lambda receives P_U and Id (matrices) or U (subspace).
EXAMPLES: dict[str, ClosedForms] = {
    "projection": ClosedForms(
        reference="projection-example",
        operator=lambda p_u, identity: p_u,
        fixed_space=lambda u: u,
        displacement=lambda p_u, identity: identity - p_u,
        range=lambda u: u.complement(),
        inverse=lambda identity, u: _plus_normal_cone(identity, u.complement()),
        t=lambda p_u, identity: 0.5 * (identity - p_u),
    ),
    "negative_projection": ClosedForms(
        reference="negative-projection-example",
        operator=lambda p_u, identity: -p_u,
        fixed_space=lambda u: Subspace.zero(u.ambient_dim),
        displacement=lambda p_u, identity: identity + p_u,
        range=lambda u: Subspace.full(u.ambient_dim),
        inverse=lambda identity, u: from_matrix(
            0.5 * identity + 0.5 * (identity - projector(u))
        ),
        t=lambda p_u, identity: 0.5 * (identity - p_u),
    ),
    "reflection": ClosedForms(
        reference="reflection-example",
        operator=lambda p_u, identity: 2.0 * p_u - identity,
        fixed_space=lambda u: u,
        displacement=lambda p_u, identity: 2.0 * (identity - p_u),
        range=lambda u: u.complement(),
        inverse=lambda identity, u: _plus_normal_cone(0.5 * identity, u.complement()),
        t=lambda p_u, identity: np.zeros_like(identity),
    ),
    "negative_reflection": ClosedForms(
        reference="negative-reflection-example",
        operator=lambda p_u, identity: identity - 2.0 * p_u,
        fixed_space=lambda u: u.complement(),
        displacement=lambda p_u, identity: 2.0 * p_u,
        range=lambda u: u,
        inverse=lambda identity, u: _plus_normal_cone(0.5 * identity, u),
        t=lambda p_u, identity: np.zeros_like(identity),
    ),
}


def _example_block(
    name: str, forms: ClosedForms, u: Subspace, tol: Tolerances
) -> tuple[GalleryBlock, DisplacementAnalysis]:
    p_u = projector(u)
    identity = np.eye(u.ambient_dim)
    analysis = analyze(forms.operator(p_u, identity), tol)
    residuals = {
        "fixed_space": subspace_distance(analysis.d, forms.fixed_space(u)),
        "displacement": operator_norm(analysis.delta - forms.displacement(p_u, identity)),
        "range": subspace_distance(factor_fundamental(analysis.delta, tol).range, forms.range(u)),
        "inverse": relation_distance(
            inverse(from_matrix(analysis.delta)), forms.inverse(identity, u)
        ),
        "t": operator_norm(analysis.t - forms.t(p_u, identity)),
    }
    if name == "projection":
        residuals["t_symmetric"] = operator_norm(analysis.t - analysis.t.T)
    checks: list[CheckReport] = [
        evaluate(f"gallery.{name}.{item}", forms.reference, residual, tol.identity_tol)
        for item, residual in residuals.items()
    ]
    return GalleryBlock(name=name, checks=checks), analysis


def _discrepancies(u: Subspace, analyses: dict[str, DisplacementAnalysis]) -> list[Discrepancy]:
    p_u = projector(u)
    t = analyses["negative_projection"].t
    return [
        Discrepancy(
            kind="DISCREPANCY",
            example="negative-projection-example",
            item="t",
            stated="T = 1/2 P_U",
            computed="T = 1/2 P_{U^perp}",
            residual_vs_stated=operator_norm(t - 0.5 * p_u),
            residual_vs_computed=operator_norm(t - 0.5 * (np.eye(u.ambient_dim) - p_u)),
        )
    ]


def _suspected_typos(u: Subspace, analyses: dict[str, DisplacementAnalysis]) -> list[Discrepancy]:
    identity = np.eye(u.ambient_dim)
    notes = []
    for name, shift, label in (("projection", 1.0, "Id"), ("reflection", 0.5, "1/2 Id")):
        lhs = inverse(from_matrix(analyses[name].delta))
        notes.append(
            Discrepancy(
                kind="SUSPECTED_TYPO",
                example=EXAMPLES[name].reference,
                item="inverse",
                stated=f"(Id - R)^-1 = {label} + N_U",
                computed=f"(Id - R)^-1 = {label} + N_{{U^perp}}",
                residual_vs_stated=relation_distance(
                    lhs, _plus_normal_cone(shift * identity, u)
                ),
                residual_vs_computed=relation_distance(
                    lhs, _plus_normal_cone(shift * identity, u.complement())
                ),
            )
        )
    return notes


def run_gallery(
    n: int = 6, dim_u: int = 3, seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES
) -> GalleryDocument:
    """Run the subspace examples on a seeded random U and the cyclic shifts of order 2 to 8.

    Residuals are held to min(1e-12, identity_tol).

    Raises:
        InputError: unless 1 <= dim_u < n.
    """
    if not 1 <= dim_u < n:
        raise InputError(f"dimU must satisfy 1 <= dimU < n, got dimU = {dim_u}, n = {n}")
    tol = tol.model_copy(update={"identity_tol": min(GALLERY_TOL, tol.identity_tol)})
    u = Subspace(n, random_subspace_basis(n, dim_u, seed))
    blocks = []
    analyses = {}
    for name, forms in EXAMPLES.items():
        block, analyses[name] = _example_block(name, forms, u, tol)
        blocks.append(block)
    for m in SHIFT_ORDERS:
        shift = cyclic_shift(m)
        outcome = run_suite("isometry", analyze(shift.r, tol), seed, isometry=shift)
        blocks.append(
            GalleryBlock(name=f"cyclic_shift_{m}", checks=outcome.checks, skipped=outcome.skipped)
        )
    discrepancies = _discrepancies(u, analyses)
    for entry in discrepancies:
        logger.info("%s in %s: stated %s", entry.kind, entry.example, entry.stated)
    return GalleryDocument(
        n=n,
        dim_u=dim_u,
        seed=seed,
        tolerances=tol,
        blocks=blocks,
        discrepancies=discrepancies,
        notes=_suspected_typos(u, analyses),
    )
