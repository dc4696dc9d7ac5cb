"""
Counter-based random streams for reproducible parallel Monte Carlo.

Each replication draws from its own Philox stream keyed by
(master seed, purpose, replication index, attempt). A replication therefore
sees the same numbers whichever worker runs it and in whatever order.
"""

import numpy as np

PURPOSES = {
    "cp": 1,
    "known-cp": 2,
    "sel-num": 3,
    "sel-term": 4,
    "stage-1": 5,
    "stage-2": 6,
    "run": 7,
}


def replication_stream(
    master_seed: int, index: int, purpose: str = "run", attempt: int = 0
) -> np.random.Generator:
    """
    Returns the generator of one replication.
    Args:
        master_seed (int): 64-bit master seed.
        index (int): Replication index.
        purpose (str): Stream family, one of PURPOSES.
        attempt (int): Redraw counter for discarded replications.
    Returns:
        numpy.random.Generator: Philox-backed generator.
    """

    seq = np.random.SeedSequence(
        entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(PURPOSES[purpose], int(index), int(attempt)),
    )
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, purpose: str) -> int:
    """Derives a 64-bit seed for a whole family of replications."""

    seq = np.random.SeedSequence(
        entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(PURPOSES[purpose],),
    )
    return int(seq.generate_state(1, dtype=np.uint64)[0])
