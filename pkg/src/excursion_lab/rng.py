"""Seeded, index-addressable random streams.

Every stream is a Philox4x64 counter-based generator keyed through
``numpy.random.SeedSequence(seed, spawn_key=(stream_index,))``.  Gaussian
variates come from ``Generator.standard_normal`` (numpy's ziggurat), so the
draws for a given ``(seed, stream_index)`` depend only on those two integers
and never on how the work is split across processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_index: int

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(ss))

    def normals(self, size: int) -> np.ndarray:
        return self.generator().standard_normal(size)

    def substream(self, offset: int, stride: int = 3) -> "RngStream":
        """Stream ``stride * stream_index + offset`` under the same seed."""
        return RngStream(self.seed, stride * int(self.stream_index) + offset)
