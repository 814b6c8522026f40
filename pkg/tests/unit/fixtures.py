# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

import math

import numpy as np

from isometry import block_rotation, cyclic_shift, signed_permutation
from numlin import Matrix
from specs import random_nonexpansive, random_subspace_basis

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
QUARTER_TURN = np.array([[0.0, -1.0], [1.0, 0.0]])
RANDOM_SIZES = (2, 4, 8, 16)
RANDOM_NORM_CAP = 0.95


def subspace_operators(n: int = 4, dim_u: int = 2, seed: int = 3) -> dict[str, Matrix]:
    basis = random_subspace_basis(n, dim_u, seed)
    p_u = basis @ basis.T
    identity = np.eye(n)
    return {
        "projection": p_u,
        "neg_projection": -p_u,
        "reflection": 2.0 * p_u - identity,
        "neg_reflection": identity - 2.0 * p_u,
    }


def structured_corpus() -> dict[str, Matrix]:
    """Operators with known structure, covering every builder and the degenerate cases."""
    return {
        "identity": np.eye(3),
        "zero": np.zeros((3, 3)),
        "swap": SWAP,
        "quarter_turn": QUARTER_TURN,
        "half_identity": 0.5 * np.eye(3),
        "cyclic_shift_3": cyclic_shift(3).r,
        "cyclic_shift_6": cyclic_shift(6).r,
        "block_rotation": block_rotation([2 * math.pi / 3, math.pi / 2, 0.0]).r,
        "signed_permutation": signed_permutation([1, 2, 0, 3], [1, -1, 1, -1]).r,
        **subspace_operators(),
    }


def random_corpus(seeds: range = range(3)) -> dict[str, Matrix]:
    """Seeded random R with ‖R‖ = 0.95 for each size in RANDOM_SIZES."""
    return {
        f"random_n{n}_seed{seed}": random_nonexpansive(n, seed, RANDOM_NORM_CAP)
        for n in RANDOM_SIZES
        for seed in seeds
    }


def full_corpus() -> dict[str, Matrix]:
    return {**structured_corpus(), **random_corpus()}


CORPUS = full_corpus()
CORPUS_IDS = sorted(CORPUS)
