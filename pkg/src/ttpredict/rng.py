"""Seeded random number generation.

All randomness in the package flows from one master seed. Independent work items (folds, grid
points, test splits) get their own stream from :func:`derive_seed`, so results do not depend on
the order in which the items are processed.
"""

import numpy as np

__all__ = [
    "get_rng",
    "derive_seed",
]

SEED_MASK = (1 << 64) - 1


def get_rng(seed: int) -> np.random.Generator:
    """
    Get a numpy random generator for a seed.

    :param seed: non-negative integer, reduced to 64 bits
    :return: generator
    """
    return np.random.default_rng(int(seed) & SEED_MASK)


def derive_seed(seed: int, index: int) -> int:
    """
    Derive the seed of the ``index``-th work item from a master seed.

    :param seed: master seed
    :param index: work item index
    :return: a 64-bit seed
    """
    sequence = np.random.SeedSequence([int(seed) & SEED_MASK, int(index)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
