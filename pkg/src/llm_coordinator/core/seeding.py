"""Named random streams derived from a single episode seed."""

import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def normalize_seed(seed: int) -> int:
    """Fold any integer into the unsigned 64-bit range."""
    return int(seed) & SEED_MASK


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for consumer ``name`` under ``seed``.

    Streams are keyed by a CRC of the name (stable across interpreter runs,
    unlike ``hash``), so adding a consumer never shifts another one's draws.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([normalize_seed(seed), key]))


def derive_trial_seed(base_seed: int, trial: int) -> int:
    """Seed for trial ``trial`` of a batch; depends only on (base_seed, trial)."""
    sequence = np.random.SeedSequence([normalize_seed(base_seed), int(trial)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
