"""Counter-based SplitMix64 stream, vectorised with numpy.

Output ``i`` (1-based) of a stream with state ``s`` is ``mix(s + i * GAMMA)``
where ``mix`` is the SplitMix64 finaliser::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic modulo 2**64. Uniform doubles are ``(u64 >> 11) * 2**-53``;
normals use one Box-Muller cosine branch per pair of uniforms
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` taken from consecutive outputs.
The scheme is language-portable: any implementation of these few lines
reproduces the same bit stream.
"""

from __future__ import annotations

import struct

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts) -> int:
    """Fold ints, floats and strings into one 64-bit seed."""
    h = 0x6A09E667F3BCC908
    for part in parts:
        if isinstance(part, str):
            words = [int.from_bytes(part.encode("utf-8")[i : i + 8].ljust(8, b"\0"), "little")
                     for i in range(0, max(len(part.encode("utf-8")), 1), 8)]
        elif isinstance(part, float):
            words = [struct.unpack("<Q", struct.pack("<d", part))[0]]
        else:
            words = [int(part) & MASK64]
        for w in words:
            h = mix64_int((h + GAMMA) ^ w)
    return h


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=np.uint64)
        out = mix64(np.uint64(self.state) + idx * np.uint64(GAMMA))
        self.state = (self.state + n * GAMMA) & MASK64
        return out

    def uniform(self, n: int = 1, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + (high - low) * u

    def normal(self, n: int = 1) -> np.ndarray:
        u = self.uniform(2 * n).reshape(n, 2)
        return np.sqrt(-2.0 * np.log1p(-u[:, 0])) * np.cos(2.0 * np.pi * u[:, 1])

    def scalar(self, low: float = 0.0, high: float = 1.0) -> float:
        return float(self.uniform(1, low, high)[0])
