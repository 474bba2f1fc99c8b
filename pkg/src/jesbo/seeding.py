"""Deterministic RNG streams.

Every stochastic operation takes an explicit seed; derived streams are
spawned from integer tag tuples so that runs are bit-reproducible across
processes and platforms.
"""

import numpy as np

# stream tags, one per purpose
INIT_DESIGN = 11
BRANCH = 12
OPT_PAIRS = 13
NOISE = 14
ACQ_GRID = 15
HYPERS = 16
TASK_GEN = 17
ORACLE = 18
RANDOM_QUERY = 19


def rng_from(*entropy: int) -> np.random.Generator:
    """PCG64 generator keyed by a tuple of non-negative ints."""
    return np.random.default_rng(np.random.SeedSequence(tuple(int(e) & 0xFFFFFFFF for e in entropy)))
