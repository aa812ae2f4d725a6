from enum import IntEnum

import numpy as np

SEED_BOUND = 2**64


class Stream(IntEnum):
    """Independent randomness streams derived from one root seed."""

    INSTANCES = 0
    TRAINING = 1
    EVALUATION = 2
    INITIAL_CHOICES = 3
    RANDOM_CHOICES = 4


def check_seed(seed: int) -> int:
    if not 0 <= seed < SEED_BOUND:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def derive_seed(root: int, stream: Stream, index: int) -> int:
    """
    Derive a 64-bit child seed for item `index` of `stream`.

    Children are independent of each other and of the order they are
    requested in, so sweeps can be generated in parallel or partially.

    Parameters:
        root (int): Root seed given on the command line.
        stream (Stream): Purpose of the child seed.
        index (int): Position of the item within the stream.

    Returns:
        int: Child seed in [0, 2**64).
    """
    sequence = np.random.SeedSequence(
        entropy=check_seed(root), spawn_key=(int(stream), int(index))
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(check_seed(seed))))
