"""
Seeded random streams.

Every stream is a numpy Generator over the counter-based Philox bit
generator. Trajectory j of a dataset draws from substream(seed, j), so the
data do not depend on the order in which trajectories are produced.
"""

import numpy as np

Rng = np.random.Generator


def make_rng(seed: int) -> Rng:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def substream(seed: int, index: int) -> Rng:
    """Independent stream number `index` derived from `seed`"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))
