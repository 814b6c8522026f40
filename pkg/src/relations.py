#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Linear relations on R^n, stored as orthonormal bases of their graphs in R^{2n}.

Graph coordinates are ordered (x, u) with x the input block, so the inverse of a
relation is a block swap and relation equality is a projector comparison.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from numlin import (
    DEFAULT_IDENTITY_TOL,
    DEFAULT_TOLERANCES,
    InputError,
    Matrix,
    Subspace,
    Tolerances,
    as_square_matrix,
    as_vector,
    factor_fundamental,
    orthonormalize,
    projector,
    subspace_distance,
)

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    """Raised when a vector lies outside the domain of a relation."""


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """Class to represent a set-valued linear operator by its graph."""

    ambient_dim: int
    graph: Subspace

    def __post_init__(self):
        if self.graph.ambient_dim != 2 * self.ambient_dim:
            raise InputError(
                f"graph lives in R^{self.graph.ambient_dim}, expected R^{2 * self.ambient_dim}"
            )

    @property
    def inputs(self) -> Matrix:
        """Input (x) block of the graph basis."""
        return self.graph.basis[: self.ambient_dim]

    @property
    def outputs(self) -> Matrix:
        """Output (u) block of the graph basis."""
        return self.graph.basis[self.ambient_dim :]


@dataclass(frozen=True, eq=False)
class AffineSet:
    """Class to represent a value set point + direction, or the empty set."""

    nonempty: bool
    point: Optional[NDArray[np.float64]] = None
    direction: Optional[Subspace] = None

    def __post_init__(self):
        if not self.nonempty:
            return
        if self.point is None or self.direction is None:
            raise InputError("a nonempty affine set needs a point and a direction")
        if np.linalg.norm(self.direction.basis.T @ self.point) > DEFAULT_IDENTITY_TOL * max(
            1.0, float(np.linalg.norm(self.point))
        ):
            raise InputError("affine set point is not orthogonal to its direction")

    @classmethod
    def empty(cls) -> "AffineSet":
        """Return the empty set."""
        return cls(nonempty=False)

    def distance(self, vector: Any) -> float:
        """Return the Euclidean distance from vector to the set (inf when empty)."""
        if not self.nonempty or self.point is None or self.direction is None:
            return math.inf
        offset = np.asarray(vector, dtype=np.float64) - self.point
        return float(np.linalg.norm(offset - projector(self.direction) @ offset))

    def contains(self, vector: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Return whether vector lies in the set within identity_tol."""
        scale = max(1.0, float(np.linalg.norm(vector)))
        return self.distance(vector) <= tol.identity_tol * scale


class RelationSpaces(NamedTuple):
    """Domain, range and image of zero of a linear relation."""

    domain: Subspace
    range: Subspace
    kernel_image: Subspace


def from_matrix(matrix: Any) -> LinearRelation:
    """Embed a square matrix M as the relation with graph {(x, Mx)}."""
    matrix = as_square_matrix(matrix)
    n = matrix.shape[0]
    basis, _ = scipy.linalg.qr(np.vstack([np.eye(n), matrix]), mode="economic")
    return LinearRelation(n, Subspace(2 * n, basis))


def inverse(relation: LinearRelation) -> LinearRelation:
    """Return the inverse relation {(u, x) : (x, u) in graph}."""
    swapped = np.vstack([relation.outputs, relation.inputs])
    return LinearRelation(relation.ambient_dim, Subspace(2 * relation.ambient_dim, swapped))


def _check_same_dim(first: LinearRelation, second: LinearRelation) -> None:
    if first.ambient_dim != second.ambient_dim:
        raise InputError(
            "relations act on different spaces: "
            f"R^{first.ambient_dim} and R^{second.ambient_dim}"
        )


def relation_sum(
    first: LinearRelation, second: LinearRelation, tol: Tolerances = DEFAULT_TOLERANCES
) -> LinearRelation:
    """Return the sum {(x, u + v) : (x, u) in first, (x, v) in second}.

    Pairs of graph vectors with equal input blocks are the kernel of [X_first, -X_second];
    mapping that kernel to (x, u + v) and re-orthonormalizing gives the sum's graph.
    """
    _check_same_dim(first, second)
    n = first.ambient_dim
    constraint = np.hstack([first.inputs, -second.inputs])
    if constraint.shape[1] == 0:
        return LinearRelation(n, Subspace.zero(2 * n))
    coefficients = factor_fundamental(constraint, tol).kernel.basis
    split = first.graph.dim
    images = np.vstack(
        [
            first.inputs @ coefficients[:split],
            first.outputs @ coefficients[:split] + second.outputs @ coefficients[split:],
        ]
    )
    graph = Subspace(2 * n, orthonormalize(images, tol))
    logger.debug("Relation sum on R^%s has graph dimension %s", n, graph.dim)
    return LinearRelation(n, graph)


def normal_cone_of(subspace: Subspace) -> LinearRelation:
    """Return the normal cone of a linear subspace S, the relation S × S^⊥."""
    n = subspace.ambient_dim
    complement = subspace.complement()
    basis = np.zeros((2 * n, subspace.dim + complement.dim))
    basis[:n, : subspace.dim] = subspace.basis
    basis[n:, subspace.dim :] = complement.basis
    return LinearRelation(n, Subspace(2 * n, basis))


def _image_of_zero(relation: LinearRelation, tol: Tolerances) -> Subspace:
    n = relation.ambient_dim
    if relation.graph.dim == 0:
        return Subspace.zero(n)
    coefficients = factor_fundamental(relation.inputs, tol).kernel.basis
    return Subspace(n, orthonormalize(relation.outputs @ coefficients, tol))


def domain_range_kernelimage(
    relation: LinearRelation, tol: Tolerances = DEFAULT_TOLERANCES
) -> RelationSpaces:
    """Return domain, range and A0 = {u : (0, u) in graph} of a relation."""
    n = relation.ambient_dim
    return RelationSpaces(
        domain=Subspace(n, orthonormalize(relation.inputs, tol)),
        range=Subspace(n, orthonormalize(relation.outputs, tol)),
        kernel_image=_image_of_zero(relation, tol),
    )


def apply(
    relation: LinearRelation, vector: Any, tol: Tolerances = DEFAULT_TOLERANCES
) -> AffineSet:
    """Return the value set of a relation at a vector.

    Args:
        relation (LinearRelation): the relation A.
        vector: the point x.
        tol (Tolerances): domain membership uses identity_tol * max(1, ‖x‖).

    Returns:
        AffineSet: empty when x is outside dom A, otherwise the min-norm value and A0.
    """
    n = relation.ambient_dim
    x = as_vector(vector, n)
    membership_tol = tol.identity_tol * max(1.0, float(np.linalg.norm(x)))
    if relation.graph.dim == 0:
        if np.linalg.norm(x) > membership_tol:
            return AffineSet.empty()
        return AffineSet(True, np.zeros(n), Subspace.zero(n))
    coefficients = scipy.linalg.lstsq(relation.inputs, x, cond=tol.rank_tol)[0]
    mismatch = float(np.linalg.norm(relation.inputs @ coefficients - x))
    if mismatch > membership_tol:
        logger.debug("Vector misses the relation domain by %s", mismatch)
        return AffineSet.empty()
    direction = _image_of_zero(relation, tol)
    value = relation.outputs @ coefficients
    return AffineSet(True, value - projector(direction) @ value, direction)


def selection_q(
    relation: LinearRelation, vector: Any, tol: Tolerances = DEFAULT_TOLERANCES
) -> NDArray[np.float64]:
    """Return the minimal-norm element of the value set at vector.

    Raises:
        DomainError: if vector is outside the domain of the relation.
    """
    values = apply(relation, vector, tol)
    if values.point is None:
        raise DomainError("vector is outside the domain of the relation")
    return values.point


def relation_distance(first: LinearRelation, second: LinearRelation) -> float:
    """Return the spectral distance between the graph projectors of two relations."""
    _check_same_dim(first, second)
    return subspace_distance(first.graph, second.graph)


def relation_equal(
    first: LinearRelation, second: LinearRelation, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """Return whether two relations have the same graph within identity_tol."""
    return relation_distance(first, second) <= tol.identity_tol
