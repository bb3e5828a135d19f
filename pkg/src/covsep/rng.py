"""Seeded SplitMix64 generator.

The generator is deliberately tiny so that any implementation can reproduce
its stream bit for bit. State is a single unsigned 64-bit word ``s``; each
draw advances ``s += 0x9E3779B97F4A7C15`` (mod 2**64) and returns the mix::

    z = s
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

all products taken mod 2**64. Uniform doubles in [0, 1) use the top 53 bits:
``(z >> 11) * 2**-53``.

Because the k-th state is ``seed + k * GAMMA``, blocks of draws are computed
in closed form with numpy and agree exactly with the scalar path.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

_TWO_M53 = 2.0 ** -53


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Deterministic 64-bit generator.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed. Values outside ``[0, 2**64)`` are rejected.
    """

    def __init__(self, seed=0):
        seed = int(seed)
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self):
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def random(self):
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _TWO_M53

    def uniform(self, low, high):
        return low + (high - low) * self.random()

    def u64_block(self, n):
        """Next ``n`` outputs as a ``uint64`` array; advances the state by ``n``."""
        n = int(n)
        if n < 0:
            raise ValueError("block size must be non-negative")
        with np.errstate(over="ignore"):
            k = np.arange(1, n + 1, dtype=np.uint64)
            states = np.uint64(self.state) + k * np.uint64(GAMMA)
            out = _mix64_array(states)
        self.state = (self.state + n * GAMMA) & MASK64
        return out

    def random_block(self, n):
        return (self.u64_block(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def uniform_block(self, low, high, n):
        return low + (high - low) * self.random_block(n)


def derive_seed(root, index):
    """Seed for the ``index``-th independent sub-run of a root seed."""
    return mix64((int(root) + (int(index) + 1) * GAMMA) & MASK64)
