"""Occupation measure, local time and Jeulin's time change of a path.

Local time is the exact time the piecewise-linear path spends in each level
band ``[i h, (i + 1) h)``, divided by ``h``.  The cumulative occupation
``H`` is linear between bin edges and ``l`` is constant on each bin, so ``H``
is exactly the integral of ``l`` in the discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .paths import PathGrid


@nb.njit(cache=True)
def _band_occupation(v, h, n_bins):
    n = v.size - 1
    dt = 1.0 / n
    occ = np.zeros(n_bins)
    for k in range(n):
        a = v[k]
        b = v[k + 1]
        lo = min(a, b)
        hi = max(a, b)
        jl = min(int(lo / h), n_bins - 1)
        jh = min(int(hi / h), n_bins - 1)
        if jl == jh:
            occ[jl] += dt
            continue
        rate = dt / (hi - lo)
        occ[jl] += rate * ((jl + 1) * h - lo)
        occ[jh] += rate * (hi - jh * h)
        full = rate * h
        for j in range(jl + 1, jh):
            occ[j] += full
    return occ


@dataclass(frozen=True, eq=False)
class OccupationProfile:
    """Binned occupation of one path.

    Attributes
    ----------
    bin_width : float
        Level band width ``h``.
    occupation : ndarray
        Time spent in ``[i h, (i + 1) h)``.
    local_time : ndarray
        ``occupation / h``; the local time, constant on each bin.
    H_edges : ndarray
        Cumulative occupation at the bin edges, ``H_edges[0] = 0``.
    path_max : float
        Maximum of the path.
    """

    bin_width: float
    occupation: np.ndarray
    local_time: np.ndarray
    H_edges: np.ndarray
    path_max: float

    @property
    def n_bins(self) -> int:
        return self.occupation.size

    @property
    def edges(self) -> np.ndarray:
        return np.arange(self.n_bins + 1) * self.bin_width

    @property
    def H_mid(self) -> np.ndarray:
        """Linear ``H`` at bin midpoints."""
        return 0.5 * (self.H_edges[:-1] + self.H_edges[1:])

    def H(self, x):
        """Cumulative occupation at level(s) ``x`` (linear between edges)."""
        return np.interp(x, self.edges, self.H_edges)

    def local_time_at(self, x):
        idx = np.floor(np.asarray(x, dtype=float) / self.bin_width).astype(np.int64)
        inside = (idx >= 0) & (idx < self.n_bins)
        out = np.where(inside, self.local_time[np.clip(idx, 0, self.n_bins - 1)], 0.0)
        return out if out.ndim else float(out)

    def H_inverse(self, t):
        """Right-continuous generalized inverse ``inf{x >= 0 : H(x) >= t}``."""
        level, _ = _h_inverse(self, t)
        return level if level.ndim else float(level)


def occupation_profile(path: PathGrid, h: float) -> OccupationProfile:
    """Band occupation of the linear interpolant of ``path`` with band width ``h``.

    Bins start at level 0 and stop at the first multiple of ``h`` strictly
    above the path maximum.
    """
    if not h > 0:
        raise ValueError(f"bin width must be positive, got {h!r}")
    v = path.values
    if v.min() < 0:
        raise ValueError("occupation profile needs a nonnegative path")
    m = float(v.max())
    n_bins = int(np.floor(m / h)) + 1
    occ = _band_occupation(v, float(h), n_bins)
    H = np.empty(n_bins + 1)
    H[0] = 0.0
    np.cumsum(occ, out=H[1:])
    for arr in (occ, H):
        arr.setflags(write=False)
    lt = occ / h
    lt.setflags(write=False)
    return OccupationProfile(float(h), occ, lt, H, m)


def path_max(path: PathGrid) -> float:
    return float(path.values.max())


def _h_inverse(profile: OccupationProfile, t):
    """Generalized inverse and the index of the bin it falls in."""
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)) or np.any(np.isnan(t)):
        raise ValueError("H_inverse is defined for t in [0, 1]")
    H = profile.H_edges
    h = profile.bin_width
    te = np.minimum(t, H[-1])
    i = np.searchsorted(H, te, side="left")
    pos = i > 0
    j = np.where(pos, i - 1, 0)
    occ = profile.occupation[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(pos & (occ > 0), (te - H[j]) / occ, 0.0)
    level = np.where(pos, (j + np.clip(frac, 0.0, 1.0)) * h, 0.0)
    return level, j


def jeulin_values(profile: OccupationProfile, t) -> np.ndarray:
    """``0.5 * l(H^{-1}(t))`` at the given time(s).

    ``l`` is read on the bin where ``H`` crosses ``t`` (bin 0 at ``t = 0``),
    so a level landing exactly on the upper edge of a bin uses that bin.
    """
    _, j = _h_inverse(profile, t)
    return 0.5 * profile.local_time[j]


def jeulin_path(profile: OccupationProfile, n_steps: int) -> PathGrid:
    """Jeulin's time-changed local time path ``t -> l(H^{-1}(t)) / 2`` on a grid."""
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")
    return PathGrid(jeulin_values(profile, np.arange(n_steps + 1) / n_steps))
