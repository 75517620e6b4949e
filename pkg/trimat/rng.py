"""Named, seeded random streams.

Every consumer of randomness (factor initialization, epoch shuffling, the
train/test split, the synthetic generator) draws from its own stream so that
changing one consumer never shifts the values another one sees.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def _label_key(label: str) -> int:
    # crc32 is stable across platforms and Python hash randomization
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class RngStream:
    """A 64-bit seed plus a consumer label, resolved to a numpy Generator."""
    seed: int
    label: str

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(_label_key(self.label),))
        return np.random.default_rng(sequence)


def derive_seed(master: int, key: str) -> int:
    """Derive a child seed from a master seed and a string key (e.g. a grid cell)."""
    sequence = np.random.SeedSequence(entropy=master & 0xFFFFFFFFFFFFFFFF, spawn_key=(_label_key(key),))
    # kept below 2**63 so seeds fit signed 64-bit columns
    return int(sequence.generate_state(1, dtype=np.uint64)[0]) & 0x7FFFFFFFFFFFFFFF
