"""Order-independent random substreams.

Every stochastic draw in the package comes from a generator keyed by
``(master_seed, purpose, index)``.  The three integers are folded into a
single 64-bit key with the SplitMix64 finalizer::

    key = mix64(mix64(mix64(seed) ^ purpose) ^ index)

    mix64(z):  z += 0x9E3779B97F4A7C15
               z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
               z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
               z  =  z ^ (z >> 31)          (all arithmetic mod 2**64)

and the key seeds a NumPy ``PCG64`` bit generator.  Because each
(sample, anchor) pair gets its own stream, results do not depend on the
order in which samples are generated.  Changing this function changes
every simulated dataset, so it is frozen; ``tests/test_rng.py`` pins
reference outputs.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

MASK64 = (1 << 64) - 1


class Purpose(IntEnum):
    CONDITION = 1
    RANGE_NOISE = 2
    ANGLE_NOISE = 3
    POSITION = 4
    BOARDING = 5
    SPLIT = 6
    SHUFFLE = 7
    DROPOUT = 8
    INIT = 9
    SEARCH = 10
    TRIAL = 11


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, purpose: int, index: int) -> int:
    z = mix64(int(master_seed) & MASK64)
    z = mix64(z ^ (int(purpose) & MASK64))
    return mix64(z ^ (int(index) & MASK64))


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    purpose_id: int
    index: int

    def generator(self) -> np.random.Generator:
        key = stream_key(self.master_seed, self.purpose_id, self.index)
        return np.random.Generator(np.random.PCG64(key))


def generator(master_seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    return RngStream(master_seed, int(purpose), index).generator()


def pair_index(i: int, j: int) -> int:
    """Pack two non-negative ids into one stream index (j < 2**20)."""
    return (int(i) << 20) | int(j)
