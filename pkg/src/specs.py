#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Operator specifications and the builders that turn them into matrices.

A specification is a JSON object naming an operator kind, the ambient dimension n and
the payload of that kind:

    {"kind": "cyclic_shift", "n": 5}
    {"kind": "projection", "n": 2, "basis": [[1.0, 0.0]]}
    {"kind": "random_nonexpansive", "n": 8, "seed": 42, "norm_cap": 0.95}
"""

import json
import logging
import math
from pathlib import Path
from typing import Literal, Optional, Sequence, get_args

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from isometry import FiniteOrderIsometry, build, rotation_matrix, signed_permutation_matrix
from numlin import InputError, Matrix, Subspace, operator_norm, projector
from reports import dump_json

logger = logging.getLogger(__name__)

MAX_DIMENSION = 256
DEFAULT_NORM_CAP = 0.95

OperatorKind = Literal[
    "matrix",
    "projection",
    "neg_projection",
    "reflection",
    "neg_reflection",
    "cyclic_shift",
    "block_rotation",
    "signed_permutation",
    "random_nonexpansive",
]
OPERATOR_KINDS: tuple[str, ...] = get_args(OperatorKind)
SUBSPACE_KINDS = ("projection", "neg_projection", "reflection", "neg_reflection")
ISOMETRY_KINDS = ("cyclic_shift", "block_rotation", "signed_permutation")

PAYLOAD_FIELDS: dict[str, frozenset[str]] = {
    "matrix": frozenset({"rows"}),
    **{kind: frozenset({"basis"}) for kind in SUBSPACE_KINDS},
    "cyclic_shift": frozenset(),
    "block_rotation": frozenset({"angles"}),
    "signed_permutation": frozenset({"permutation", "signs"}),
    "random_nonexpansive": frozenset({"seed", "norm_cap"}),
}
OPTIONAL_FIELDS = ("rows", "basis", "angles", "permutation", "signs", "seed", "norm_cap")

KIND_ALIASES = {
    "cyclic": "cyclic_shift",
    "rotation": "block_rotation",
    "signed": "signed_permutation",
    "random": "random_nonexpansive",
}


class OperatorSpec(BaseModel):
    """Description of a linear operator R on R^n."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: OperatorKind = Field(
        description="Operator family.",
        examples=["cyclic_shift"],
    )
    n: int = Field(
        description="Ambient dimension.",
        examples=[5],
        ge=1,
        le=MAX_DIMENSION,
    )
    rows: Optional[list[list[float]]] = Field(
        default=None,
        description="Rows of R, for the matrix kind.",
    )
    basis: Optional[list[list[float]]] = Field(
        default=None,
        description="Orthonormal basis vectors of U, for the subspace kinds.",
        examples=[[[1.0, 0.0]]],
    )
    angles: Optional[list[float]] = Field(
        default=None,
        description="Rotation angles in radians, one per 2x2 block.",
    )
    permutation: Optional[list[int]] = Field(
        default=None,
        description="R e_j = signs[j] e_{permutation[j]}.",
    )
    signs: Optional[list[int]] = Field(default=None)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    norm_cap: Optional[float] = Field(default=None, gt=0, le=1)

    @model_validator(mode="after")
    def payload_matches_kind(self) -> "OperatorSpec":
        """Require exactly the payload of the kind, with shapes matching n."""
        present = {name for name in OPTIONAL_FIELDS if getattr(self, name) is not None}
        expected = PAYLOAD_FIELDS[self.kind]
        if present != expected:
            raise ValueError(
                f"kind {self.kind} takes fields {sorted(expected)}, got {sorted(present)}"
            )
        if self.rows is not None and (
            len(self.rows) != self.n or any(len(row) != self.n for row in self.rows)
        ):
            raise ValueError(f"rows must form a {self.n}x{self.n} matrix")
        if self.basis is not None:
            if any(len(vector) != self.n for vector in self.basis):
                raise ValueError(f"basis vectors must have length {self.n}")
            u_subspace(self)
        if self.angles is not None and 2 * len(self.angles) != self.n:
            raise ValueError(f"{len(self.angles)} angles act on R^{2 * len(self.angles)}")
        if self.permutation is not None and len(self.permutation) != self.n:
            raise ValueError(f"permutation must have length {self.n}")
        if self.kind == "cyclic_shift" and self.n < 2:
            raise ValueError("cyclic_shift needs n >= 2")
        return self


def spec_is_valid(data: dict) -> bool:
    """Return whether data is a valid operator specification.

    Args:
        data (dict): Data to be validated.

    Returns:
        bool: True if data is valid, False otherwise.
    """
    try:
        OperatorSpec.model_validate(data)
        return True
    except ValidationError as e:
        logger.error("Invalid data: %s", e)
        return False


def _validated(data: dict) -> OperatorSpec:
    try:
        return OperatorSpec.model_validate(data)
    except ValidationError as e:
        raise InputError(f"invalid operator spec: {e}") from e


def load_spec(path: Path) -> OperatorSpec:
    """Read and validate a specification file.

    Raises:
        InputError: if the file is unreadable, not JSON, or not a valid specification.
    """
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InputError(f"{path} must hold a JSON object")
    spec = _validated(data)
    logger.info("Loaded %s spec on R^%s from %s", spec.kind, spec.n, path)
    return spec


def dump_spec(spec: OperatorSpec) -> str:
    """Serialize a specification without its unused fields."""
    return dump_json(spec.model_dump(exclude_none=True))


def u_subspace(spec: OperatorSpec) -> Subspace:
    """Return the subspace U of a subspace kind."""
    if spec.basis is None:
        raise InputError(f"kind {spec.kind} has no subspace")
    if not spec.basis:
        return Subspace.zero(spec.n)
    return Subspace(spec.n, np.array(spec.basis, dtype=np.float64).T)


def random_subspace_basis(n: int, k: int, seed: int) -> Matrix:
    """Return an n×k orthonormal basis of a seeded random k-dimensional subspace."""
    if not 0 <= k <= n:
        raise InputError(f"subspace dimension must lie in [0, {n}], got {k}")
    if k == 0:
        return np.zeros((n, 0))
    generator = np.random.Generator(np.random.PCG64(seed))
    q, _ = scipy.linalg.qr(generator.standard_normal((n, k)), mode="economic")
    return q


def random_nonexpansive(n: int, seed: int, norm_cap: float = DEFAULT_NORM_CAP) -> Matrix:
    """Return norm_cap·G/‖G‖ for a seeded standard normal n×n matrix G."""
    if not 0 < norm_cap <= 1:
        raise InputError(f"norm_cap must lie in (0, 1], got {norm_cap}")
    generator = np.random.Generator(np.random.PCG64(seed))
    g = generator.standard_normal((n, n))
    return norm_cap * g / operator_norm(g)


def _structural_params(spec: OperatorSpec) -> dict:
    if spec.kind == "cyclic_shift":
        return {"n": spec.n}
    if spec.kind == "block_rotation":
        return {"angles": spec.angles}
    return {"permutation": spec.permutation, "signs": spec.signs}


def _structural_matrix(spec: OperatorSpec) -> tuple[Matrix, int]:
    if spec.kind == "cyclic_shift":
        return np.roll(np.eye(spec.n), 1, axis=0), spec.n
    if spec.kind == "block_rotation":
        return rotation_matrix(spec.angles or [])
    return signed_permutation_matrix(spec.permutation or [], spec.signs or [])


def structural_isometry(spec: OperatorSpec) -> Optional[FiniteOrderIsometry]:
    """Return the isometry with its exact order for the isometry kinds.

    Returns None for the other kinds and for isometry kinds whose matrix is the identity,
    which has order 1.
    """
    if spec.kind not in ISOMETRY_KINDS:
        return None
    _, order = _structural_matrix(spec)
    if order < 2:
        logger.debug("%s on R^%s is the identity", spec.kind, spec.n)
        return None
    return build(spec.kind, **_structural_params(spec))


def build_operator(spec: OperatorSpec) -> Matrix:
    """Return the matrix of R described by a specification."""
    if spec.kind == "matrix":
        return np.array(spec.rows, dtype=np.float64)
    if spec.kind == "random_nonexpansive":
        return random_nonexpansive(spec.n, spec.seed or 0, spec.norm_cap or DEFAULT_NORM_CAP)
    if spec.kind in SUBSPACE_KINDS:
        p_u = projector(u_subspace(spec))
        identity = np.eye(spec.n)
        return {
            "projection": p_u,
            "neg_projection": -p_u,
            "reflection": 2.0 * p_u - identity,
            "neg_reflection": identity - 2.0 * p_u,
        }[spec.kind]
    r, _ = _structural_matrix(spec)
    return r


def make_spec(
    kind: str,
    n: Optional[int] = None,
    dim_u: Optional[int] = None,
    seed: int = 0,
    norm_cap: float = DEFAULT_NORM_CAP,
    angles: Optional[Sequence[float]] = None,
    permutation: Optional[Sequence[int]] = None,
    signs: Optional[Sequence[int]] = None,
    rows: Optional[Sequence[Sequence[float]]] = None,
) -> OperatorSpec:
    """Build the specification written by the `make` command.

    Subspace kinds draw a seeded random U of dimension dim_u. Random operators are
    materialized into a matrix spec so the file does not depend on the generator.

    Raises:
        InputError: if the parameters do not describe a valid operator.
    """
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in OPERATOR_KINDS:
        raise InputError(f"unknown kind {kind!r}, expected one of {list(OPERATOR_KINDS)}")
    if kind == "block_rotation" and n is None and angles:
        n = 2 * len(angles)
    if kind == "signed_permutation" and n is None and permutation:
        n = len(permutation)
    if kind == "matrix" and n is None and rows:
        n = len(rows)
    if n is None:
        raise InputError(f"kind {kind} needs --n")
    data: dict = {"kind": kind, "n": n}
    if kind == "matrix":
        data["rows"] = [list(row) for row in rows or []]
    elif kind in SUBSPACE_KINDS:
        if dim_u is None:
            raise InputError(f"kind {kind} needs --dimU")
        if not 0 <= dim_u <= n:
            raise InputError(f"dimU must lie in [0, {n}], got {dim_u}")
        data["basis"] = random_subspace_basis(n, dim_u, seed).T.tolist()
    elif kind == "block_rotation":
        data["angles"] = list(angles or [])
    elif kind == "signed_permutation":
        data["permutation"] = list(permutation or [])
        data["signs"] = list(signs) if signs is not None else [1] * n
    elif kind == "random_nonexpansive":
        data = {"kind": "matrix", "n": n, "rows": random_nonexpansive(n, seed, norm_cap).tolist()}
    spec = _validated(data)
    if spec.kind in ISOMETRY_KINDS:
        structural_isometry(spec)
    logger.info("Made %s spec on R^%s", spec.kind, spec.n)
    return spec


def describe(spec: OperatorSpec) -> str:
    """Return a one-line summary of a specification for text reports."""
    details = {
        "block_rotation": lambda: "turns " + ", ".join(
            f"{angle / (2 * math.pi):.6g}" for angle in spec.angles or []
        ),
        "signed_permutation": lambda: f"permutation {spec.permutation} signs {spec.signs}",
        "random_nonexpansive": lambda: f"seed {spec.seed} norm_cap {spec.norm_cap}",
    }
    if spec.basis is not None:
        return f"{spec.kind} on R^{spec.n}, dim U = {len(spec.basis)}"
    suffix = details.get(spec.kind)
    return f"{spec.kind} on R^{spec.n}" + (f", {suffix()}" if suffix else "")
