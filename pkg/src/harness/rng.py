"""
Seeded random streams for reproducible simulations
"""
from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    """Independent stream per use inside one replication"""
    TYPES = 0
    LEADER_ACTION = 1


def stream(root_seed: int, replication: int, purpose: Purpose) -> np.random.Generator:
    """
    Philox generator keyed by (root seed, replication, purpose).

    The stream for a key never depends on how many other streams were drawn, so traces
    are reproducible for any replication order or worker count.
    """
    sequence = np.random.SeedSequence(root_seed, spawn_key=(int(replication), int(purpose)))
    return np.random.Generator(np.random.Philox(sequence))
