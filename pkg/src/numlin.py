#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Dense linear-algebra substrate shared by every analysis.

Rank decisions, kernels and ranges come from one SVD-based factorization, and every
subspace is carried around as an orthonormal basis so that equality tests reduce to
comparing orthogonal projectors.
"""

import logging
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]

DEFAULT_RANK_TOL = 1e-10
DEFAULT_IDENTITY_TOL = 1e-9
DEFAULT_PSD_TOL = 1e-9


class InputError(ValueError):
    """Raised when an input violates a documented precondition."""


class UndefinedQuantityError(ValueError):
    """Raised when a requested quantity does not exist for the given input."""


class NumericalFailureError(RuntimeError):
    """Raised when a computed result misses its residual postcondition."""

    def __init__(self, message: str, residuals: dict[str, float]):
        super().__init__(f"{message}: {residuals}")
        self.residuals = residuals


class Tolerances(BaseModel):
    """Numerical thresholds used by rank decisions and identity checks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    rank_tol: float = Field(
        default=DEFAULT_RANK_TOL,
        description="Singular values at or below rank_tol * sigma_max count as zero.",
        examples=[1e-10],
        gt=0,
        lt=1,
    )
    identity_tol: float = Field(
        default=DEFAULT_IDENTITY_TOL,
        description="Absolute residual bound for operator identities.",
        examples=[1e-9],
        gt=0,
    )
    psd_tol: float = Field(
        default=DEFAULT_PSD_TOL,
        description="Slack allowed below zero in eigenvalue nonnegativity tests.",
        examples=[1e-9],
        gt=0,
    )


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(data: Any, name: str = "matrix") -> Matrix:
    """Validate and convert data to a finite, non-empty float64 matrix.

    Args:
        data: Anything numpy can turn into a 2-D array.
        name (str): Name used in error messages.

    Returns:
        Matrix: A float64 copy of the data.
    """
    try:
        matrix = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} is not numeric: {e}") from e
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise InputError(f"{name} must be a non-empty 2-D array, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InputError(f"{name} has non-finite entries")
    return matrix


def as_square_matrix(data: Any, name: str = "matrix") -> Matrix:
    """Validate and convert data to a finite square float64 matrix."""
    matrix = as_matrix(data, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise InputError(f"{name} must be square, got shape {matrix.shape}")
    return matrix


def as_vector(data: Any, n: int, name: str = "vector") -> NDArray[np.float64]:
    """Validate and convert data to a finite vector of length n."""
    try:
        vector = np.array(data, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} is not numeric: {e}") from e
    if vector.shape != (n,):
        raise InputError(f"{name} must have length {n}, got {vector.shape[0]}")
    if not np.all(np.isfinite(vector)):
        raise InputError(f"{name} has non-finite entries")
    return vector


def operator_norm(matrix: Matrix) -> float:
    """Return the spectral norm (largest singular value) of a matrix."""
    if matrix.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(matrix)[0])


def _numerical_rank(singular_values: NDArray[np.float64], tol: Tolerances) -> int:
    if singular_values.size == 0 or singular_values[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular_values > tol.rank_tol * singular_values[0]))


def orthonormalize(vectors: Matrix, tol: Tolerances = DEFAULT_TOLERANCES) -> Matrix:
    """Return an orthonormal basis of the column span of vectors.

    Args:
        vectors (Matrix): n×k matrix whose columns span the subspace; k may be 0.
        tol (Tolerances): rank_tol decides which directions are numerically zero.

    Returns:
        Matrix: n×r matrix with orthonormal columns, r the numerical rank.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n, k = vectors.shape
    if k == 0:
        return np.zeros((n, 0))
    left, singular_values, _ = scipy.linalg.svd(vectors, full_matrices=False)
    rank = _numerical_rank(singular_values, tol)
    return left[:, :rank].copy()


@dataclass(frozen=True, eq=False)
class Subspace:
    """Class to represent a linear subspace of R^n by an orthonormal basis."""

    ambient_dim: int
    basis: Matrix

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise InputError(f"ambient dimension must be positive, got {self.ambient_dim}")
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise InputError(
                f"basis must have {self.ambient_dim} rows, got shape {basis.shape}"
            )
        if basis.shape[1] > self.ambient_dim:
            raise InputError(
                f"{basis.shape[1]} basis vectors exceed dimension {self.ambient_dim}"
            )
        if not np.all(np.isfinite(basis)):
            raise InputError("basis has non-finite entries")
        gram_residual = operator_norm(basis.T @ basis - np.eye(basis.shape[1]))
        if gram_residual > DEFAULT_IDENTITY_TOL:
            raise InputError(f"basis is not orthonormal (residual {gram_residual:.3e})")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        """Return the zero subspace of R^n."""
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        """Return R^n itself."""
        return cls(n, np.eye(n))

    @classmethod
    def spanned_by(cls, vectors: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """Return the span of the columns of vectors."""
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        return cls(vectors.shape[0], orthonormalize(vectors, tol))

    @property
    def dim(self) -> int:
        """Dimension of the subspace."""
        return int(self.basis.shape[1])

    def complement(self) -> "Subspace":
        """Return the orthogonal complement in R^n."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        if self.dim == self.ambient_dim:
            return Subspace.zero(self.ambient_dim)
        return Subspace(self.ambient_dim, scipy.linalg.null_space(self.basis.T))


class FundamentalSubspaces(NamedTuple):
    """Kernel, range and rank of a matrix as decided by one SVD."""

    kernel: Subspace
    range: Subspace
    rank: int
    singular_values: tuple[float, ...]


def factor_fundamental(
    matrix: Matrix, tol: Tolerances = DEFAULT_TOLERANCES
) -> FundamentalSubspaces:
    """Compute kernel and range of a matrix with a relative rank cut.

    The rank is the number of singular values strictly above rank_tol * sigma_max,
    so a zero matrix has rank 0 and a full kernel.

    Args:
        matrix (Matrix): rows×cols matrix.
        tol (Tolerances): thresholds; only rank_tol is used.

    Returns:
        FundamentalSubspaces: kernel in R^cols, range in R^rows, rank and the
        singular values in decreasing order.
    """
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    left, singular_values, right_t = scipy.linalg.svd(matrix, full_matrices=True)
    rank = _numerical_rank(singular_values, tol)
    logger.debug("Factored %sx%s matrix with rank %s", rows, cols, rank)
    return FundamentalSubspaces(
        kernel=Subspace(cols, right_t[rank:].T.copy()),
        range=Subspace(rows, left[:, :rank].copy()),
        rank=rank,
        singular_values=tuple(float(s) for s in singular_values),
    )


def projector(subspace: Subspace) -> Matrix:
    """Return the orthogonal projector onto a subspace."""
    return subspace.basis @ subspace.basis.T


def subspace_distance(first: Subspace, second: Subspace) -> float:
    """Return the spectral distance between the projectors of two subspaces."""
    if first.ambient_dim != second.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {first.ambient_dim} != {second.ambient_dim}"
        )
    return operator_norm(projector(first) - projector(second))


def subspace_equal(
    first: Subspace, second: Subspace, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """Return whether two subspaces coincide within identity_tol."""
    return subspace_distance(first, second) <= tol.identity_tol


class PenroseResiduals(NamedTuple):
    """Residuals of the four Penrose equations for a candidate pseudoinverse."""

    r1: float
    r2: float
    r3: float
    r4: float

    @property
    def worst(self) -> float:
        """Largest of the four residuals."""
        return max(self)


def penrose_residuals(matrix: Matrix, candidate: Matrix) -> PenroseResiduals:
    """Evaluate the Penrose equations for candidate as pseudoinverse of matrix.

    Returns:
        PenroseResiduals: ‖MPM − M‖, ‖PMP − P‖, ‖(MP)ᵀ − MP‖, ‖(PM)ᵀ − PM‖.
    """
    if matrix.ndim != 2 or candidate.shape != matrix.T.shape:
        raise InputError(
            f"candidate shape {candidate.shape} does not match matrix shape {matrix.shape}"
        )
    matrix_candidate = matrix @ candidate
    candidate_matrix = candidate @ matrix
    return PenroseResiduals(
        r1=operator_norm(matrix_candidate @ matrix - matrix),
        r2=operator_norm(candidate_matrix @ candidate - candidate),
        r3=operator_norm(matrix_candidate.T - matrix_candidate),
        r4=operator_norm(candidate_matrix.T - candidate_matrix),
    )


def pseudoinverse(matrix: Matrix, tol: Tolerances = DEFAULT_TOLERANCES) -> Matrix:
    """Return the Moore-Penrose inverse of a matrix.

    Singular values at or below the rank cut are treated as zero. The result is
    checked against the Penrose equations before it is returned.

    Raises:
        NumericalFailureError: if a Penrose residual exceeds identity_tol * max(1, ‖M‖).
    """
    matrix = as_matrix(matrix)
    left, singular_values, right_t = scipy.linalg.svd(matrix, full_matrices=False)
    rank = _numerical_rank(singular_values, tol)
    candidate = (right_t[:rank].T / singular_values[:rank]) @ left[:, :rank].T
    residuals = penrose_residuals(matrix, candidate)
    bound = tol.identity_tol * max(1.0, operator_norm(matrix))
    if residuals.worst > bound:
        logger.error("Pseudoinverse residuals %s exceed %s", residuals, bound)
        raise NumericalFailureError(
            "pseudoinverse misses the Penrose equations", residuals._asdict()
        )
    return candidate


def smallest_positive_singular(matrix: Matrix, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Return the smallest singular value above the rank cut.

    Raises:
        UndefinedQuantityError: if the matrix is numerically zero.
    """
    singular_values = scipy.linalg.svdvals(as_matrix(matrix))
    rank = _numerical_rank(singular_values, tol)
    if rank == 0:
        raise UndefinedQuantityError("zero matrix has no positive singular value")
    return float(singular_values[rank - 1])


def symmetric_part(matrix: Matrix) -> Matrix:
    """Return ½(M + Mᵀ)."""
    return 0.5 * (matrix + matrix.T)


def min_eigenvalue(symmetric: Matrix) -> float:
    """Return the smallest eigenvalue of a symmetric matrix, 0.0 for an empty one."""
    if symmetric.size == 0:
        return 0.0
    return float(scipy.linalg.eigvalsh(symmetric)[0])
