#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Isometries of finite order and their orbit-sum formulas."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from displacement import DisplacementAnalysis
from numlin import (
    DEFAULT_TOLERANCES,
    InputError,
    Matrix,
    Tolerances,
    as_square_matrix,
    factor_fundamental,
    operator_norm,
    projector,
)

logger = logging.getLogger(__name__)

MAX_ORDER_DENOMINATOR = 10_000
RATIONAL_ANGLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteOrderIsometry:
    """Class to represent an isometry R with R^m = Id for the minimal m ≥ 2."""

    r: Matrix
    order: int

    def __post_init__(self):
        r = as_square_matrix(self.r, "R")
        object.__setattr__(self, "r", r)
        if self.order < 2:
            raise InputError(f"order must be at least 2, got {self.order}")
        tol = DEFAULT_TOLERANCES.identity_tol
        identity = np.eye(r.shape[0])
        if operator_norm(r.T @ r - identity) > tol:
            raise InputError("R is not an isometry")
        power = identity
        returned = False
        for k in range(1, self.order + 1):
            power = power @ r
            returned = operator_norm(power - identity) <= tol
            if k < self.order and returned:
                raise InputError(f"R^{k} = Id, so {self.order} is not the exact order")
        if not returned:
            raise InputError(f"R^{self.order} is not the identity")

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return int(self.r.shape[0])

    def powers(self) -> list[Matrix]:
        """Return R^0, ..., R^{m-1}."""
        result = [np.eye(self.n)]
        for _ in range(1, self.order):
            result.append(result[-1] @ self.r)
        return result

    def orbit_sum(self) -> Matrix:
        """Return the sum of R^k over k = 0, ..., m-1."""
        return sum(self.powers(), np.zeros((self.n, self.n)))


class SeriesCheck(NamedTuple):
    """The averaged orbit sum and its residuals."""

    series: Matrix
    residual: float
    invariance_residual: float


class TSeries(NamedTuple):
    """The closed-form series for T and its residuals."""

    series: Matrix
    residual: float
    skew_residual: float


class Sandwich(NamedTuple):
    """Both sides of the symmetric-sandwich identity."""

    lhs: Matrix
    rhs: Matrix
    residual: float


def cyclic_shift(n: int) -> FiniteOrderIsometry:
    """Return the shift e_1 → e_2 → ... → e_n → e_1 of order n."""
    if n < 2:
        raise InputError(f"cyclic shift needs n >= 2, got {n}")
    return FiniteOrderIsometry(np.roll(np.eye(n), 1, axis=0), n)


def rational_turns(angle: float) -> Fraction:
    """Return angle / 2π as a fraction, rejecting angles without finite order."""
    turns = Fraction(angle / (2 * math.pi)).limit_denominator(MAX_ORDER_DENOMINATOR)
    if abs(2 * math.pi * float(turns) - angle) > RATIONAL_ANGLE_TOL * max(1.0, abs(angle)):
        raise InputError(f"angle {angle!r} is not a rational multiple of 2*pi")
    return turns


def rotation_matrix(angles: Sequence[float]) -> tuple[Matrix, int]:
    """Return the block-diagonal rotation by the given angles (radians) and its order.

    The order is 1 when every angle is a whole number of turns.
    """
    if not angles:
        raise InputError("block rotation needs at least one angle")
    blocks = []
    denominators = []
    for angle in angles:
        turns = rational_turns(float(angle))
        denominators.append(turns.denominator)
        theta = 2 * math.pi * float(turns)
        blocks.append([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return scipy.linalg.block_diag(*blocks), math.lcm(*denominators)


def block_rotation(angles: Sequence[float]) -> FiniteOrderIsometry:
    """Return the block-diagonal rotation by the given angles (radians)."""
    return FiniteOrderIsometry(*rotation_matrix(angles))


def _cycles(permutation: Sequence[int]) -> list[list[int]]:
    seen: set[int] = set()
    cycles = []
    for start in range(len(permutation)):
        if start in seen:
            continue
        cycle = []
        index = start
        while index not in seen:
            seen.add(index)
            cycle.append(index)
            index = permutation[index]
        cycles.append(cycle)
    return cycles


def signed_permutation_matrix(
    permutation: Sequence[int], signs: Sequence[int]
) -> tuple[Matrix, int]:
    """Return R with R e_j = signs[j] e_{permutation[j]} and its order.

    A cycle of length L has order L when the product of its signs is +1 and 2L otherwise.
    """
    n = len(permutation)
    if sorted(permutation) != list(range(n)):
        raise InputError(f"{list(permutation)} is not a permutation of 0..{n - 1}")
    if len(signs) != n or any(sign not in (1, -1) for sign in signs):
        raise InputError(f"signs must be {n} values in {{+1, -1}}")
    r = np.zeros((n, n))
    for column, (row, sign) in enumerate(zip(permutation, signs)):
        r[row, column] = sign
    cycle_orders = [
        len(cycle) * (1 if math.prod(signs[i] for i in cycle) == 1 else 2)
        for cycle in _cycles(permutation)
    ]
    return r, math.lcm(*cycle_orders)


def signed_permutation(permutation: Sequence[int], signs: Sequence[int]) -> FiniteOrderIsometry:
    """Return the signed permutation R with R e_j = signs[j] e_{permutation[j]}."""
    return FiniteOrderIsometry(*signed_permutation_matrix(permutation, signs))


BUILDERS: dict[str, Callable[..., FiniteOrderIsometry]] = {
    "cyclic_shift": cyclic_shift,
    "block_rotation": block_rotation,
    "signed_permutation": signed_permutation,
}


def build(kind: str, **params: Any) -> FiniteOrderIsometry:
    """Build an isometry of one of the BUILDERS kinds with its exact order."""
    if kind not in BUILDERS:
        raise InputError(f"unknown isometry kind {kind!r}, expected one of {sorted(BUILDERS)}")
    isometry = BUILDERS[kind](**params)
    logger.debug("Built %s of order %s on R^%s", kind, isometry.order, isometry.n)
    return isometry


def order_of(r: Any, m_max: int, tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[int]:
    """Return the smallest m <= m_max with R^m = Id, or None."""
    r = as_square_matrix(r, "R")
    if m_max < 2:
        raise InputError(f"m_max must be at least 2, got {m_max}")
    identity = np.eye(r.shape[0])
    power = identity
    for m in range(1, m_max + 1):
        power = power @ r
        if operator_norm(power - identity) <= tol.identity_tol:
            return m
    return None


def projector_series(
    isometry: FiniteOrderIsometry, tol: Tolerances = DEFAULT_TOLERANCES
) -> SeriesCheck:
    """Compare (1/m)ΣR^k with the projector onto Fix R."""
    orbit = isometry.orbit_sum()
    series = orbit / isometry.order
    fixed_space = factor_fundamental(np.eye(isometry.n) - isometry.r, tol).kernel
    return SeriesCheck(
        series=series,
        residual=operator_norm(series - projector(fixed_space)),
        invariance_residual=operator_norm(isometry.r @ orbit - orbit),
    )


def t_series(isometry: FiniteOrderIsometry, analysis: DisplacementAnalysis) -> TSeries:
    """Compare (1/2m)Σ_{k=1}^{m-1}(m − 2k)R^k with T and check that it is skew."""
    m = isometry.order
    powers = isometry.powers()
    weighted = ((m - 2 * k) * powers[k] for k in range(1, m))
    series = sum(weighted, np.zeros((isometry.n, isometry.n))) / (2 * m)
    return TSeries(
        series=series,
        residual=operator_norm(series - analysis.t),
        skew_residual=operator_norm(series + series.T),
    )


def symmetric_sandwich(
    isometry: FiniteOrderIsometry, analysis: DisplacementAnalysis
) -> Sandwich:
    """Compare ½P_{D⊥}(R + Rᵀ)P_{D⊥} with its orbit-sum closed form.

    The inner sum over k = 2, ..., m−2 is empty for m < 4.
    """
    m = isometry.order
    powers = isometry.powers()
    r = isometry.r
    lhs = 0.5 * analysis.p_dperp @ (r + r.T) @ analysis.p_dperp
    inner = sum((powers[k] for k in range(2, m - 1)), np.zeros((isometry.n, isometry.n)))
    rhs = (-np.eye(isometry.n) - inner + 0.5 * max(1, m - 2) * (r + powers[m - 1])) / m
    return Sandwich(lhs, rhs, operator_norm(lhs - rhs))


def orbit_identities(isometry: FiniteOrderIsometry) -> dict[str, float]:
    """Return residuals of the orbit-sum identities used by the series formulas.

    Keys: shift_forward (ΣR^{k+1} = ΣR^k), shift_backward (ΣR^{k-1} = ΣR^k),
    invariance (R^l ΣR^k = ΣR^k for every l < m) and symmetric
    ((R + R⁻¹)(1/m)ΣR^k = (2/m)ΣR^k).
    """
    m = isometry.order
    r = isometry.r
    orbit = isometry.orbit_sum()
    return {
        "shift_forward": operator_norm(r @ orbit - orbit),
        "shift_backward": operator_norm(r.T @ orbit - orbit),
        "invariance": max(operator_norm(power @ orbit - orbit) for power in isometry.powers()),
        "symmetric": operator_norm((r + r.T) @ orbit / m - 2.0 * orbit / m),
    }
