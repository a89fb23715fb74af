"""
Deterministic random streams for reproducible trials.

Each trial owns its own numpy Generator derived from (master seed, keys), so
results do not depend on the order or the process in which trials run.
"""
import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def label_key(label: str) -> int:
    """Stable integer key for a text label (hash() is salted per process)"""
    return zlib.crc32(label.encode("utf-8"))


def derive_stream(master_seed: int, *keys: int) -> np.random.Generator:
    """
    Substream for the given key path

    Args:
        master_seed: 64-bit unsigned master seed
        keys: Non-negative integers identifying the substream

    Returns:
        Independent PCG64 generator
    """
    sequence = np.random.SeedSequence(int(master_seed) & SEED_MASK, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))
