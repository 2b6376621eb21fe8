"""Brownian bridges and normalized Brownian excursions on a uniform grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream


@dataclass(frozen=True, eq=False)
class PathGrid:
    """A continuous path on [0, 1] given by its values at ``t_k = k / n_steps``.

    Between grid points the path is the linear interpolant.  ``values`` is
    stored read-only.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if v.size < 2:
            raise ValueError("a path needs at least two grid values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) / self.n_steps

    def at(self, t) -> np.ndarray | float:
        """Linear interpolation of the path at time(s) ``t``."""
        return np.interp(t, self.times, self.values)

    @classmethod
    def from_function(cls, f, n_steps: int) -> "PathGrid":
        return cls(f(np.arange(n_steps + 1) / n_steps))


def _check_steps(n_steps):
    if int(n_steps) != n_steps or n_steps < 2:
        raise ValueError(f"n_steps must be an integer >= 2, got {n_steps!r}")


def _bridge_values(z: np.ndarray) -> np.ndarray:
    n = z.size
    b = np.empty(n + 1)
    b[0] = 0.0
    np.cumsum(z, out=b[1:])
    b[1:] *= np.sqrt(1.0 / n)
    t = np.arange(n + 1) / n
    b -= t * b[n]
    b[0] = 0.0
    b[n] = 0.0
    return b


def sample_brownian_bridge(n_steps: int, stream: RngStream) -> PathGrid:
    """Standard Brownian bridge from 0 to 0, built as ``B_t - t B_1``."""
    _check_steps(n_steps)
    return PathGrid(_bridge_values(stream.normals(n_steps)))


def excursion_values(n_steps: int, stream: RngStream) -> np.ndarray:
    """Raw value array of :func:`sample_excursion` (no wrapper, no copy)."""
    _check_steps(n_steps)
    sq = np.zeros(n_steps + 1)
    for j in range(3):
        b = _bridge_values(stream.substream(j).normals(n_steps))
        sq += b * b
    return np.sqrt(sq)


def sample_excursion(n_steps: int, stream: RngStream) -> PathGrid:
    """Normalized Brownian excursion as the norm of a 3-d Brownian bridge.

    The three coordinate bridges use streams ``3k``, ``3k + 1`` and
    ``3k + 2`` where ``k = stream.stream_index``.
    """
    return PathGrid(excursion_values(n_steps, stream))
