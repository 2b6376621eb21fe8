"""Normal CDF, Kolmogorov-Smirnov tests and moment summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erfc

SQRT1_2 = math.sqrt(0.5)


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    threshold: float
    alpha: float
    passed: bool
    sample_sizes: tuple[int, int]

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict:
        return {"name": self.name, "statistic": self.statistic, "threshold": self.threshold,
                "alpha": self.alpha, "pass": self.passed, "sample_sizes": list(self.sample_sizes)}

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(d["name"], d["statistic"], d["threshold"], d["alpha"], d["pass"],
                   tuple(d["sample_sizes"]))


@dataclass(frozen=True)
class MomentSummary:
    count: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float

    def to_dict(self) -> dict:
        return asdict(self)


def normal_cdf(z):
    """Standard normal CDF, ``0.5 * erfc(-z / sqrt(2))``.

    ``erfc`` is the Cephes rational approximation shipped with scipy
    (relative error near machine precision), so the absolute error of the
    result is far below 1e-10.  Accepts scalars or arrays.
    """
    out = 0.5 * erfc(-np.asarray(z, dtype=float) * SQRT1_2)
    return float(out) if out.ndim == 0 else out


def normal_sf(z):
    """Upper tail ``1 - Phi(z)`` without cancellation."""
    return normal_cdf(-np.asarray(z, dtype=float))


def kolmogorov_critical(alpha: float) -> float:
    """Asymptotic constant ``c(alpha) = sqrt(-ln(alpha / 2) / 2)``."""
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def _sample(xs, what="sample"):
    x = np.asarray(xs, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"{what} is empty")
    return x


def ks_one_sample_normal(xs, mean: float = 0.0, variance: float = 1.0,
                         alpha: float = 0.001, name: str = "ks1") -> TestReport:
    """One-sample KS test of ``xs`` against ``N(mean, variance)``."""
    x = np.sort(_sample(xs))
    if not variance > 0:
        raise ValueError("variance must be positive")
    _check_alpha(alpha)
    n = x.size
    cdf = normal_cdf((x - mean) / math.sqrt(variance))
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    thr = kolmogorov_critical(alpha) / math.sqrt(n)
    return TestReport(name, d, thr, alpha, d < thr, (n, 0))


def ks_two_sample(xs, ys, alpha: float = 0.001, name: str = "ks2") -> TestReport:
    """Two-sample KS test; both ECDFs are read just after each merged point."""
    x = np.sort(_sample(xs, "first sample"))
    y = np.sort(_sample(ys, "second sample"))
    _check_alpha(alpha)
    n, m = x.size, y.size
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / n
    fy = np.searchsorted(y, grid, side="right") / m
    d = float(np.max(np.abs(fx - fy)))
    thr = kolmogorov_critical(alpha) * math.sqrt((n + m) / (n * m))
    return TestReport(name, d, thr, alpha, d < thr, (n, m))


def moment_summary(xs) -> MomentSummary:
    """Welford mean/variance with Kahan-compensated mean updates."""
    x = np.asarray(xs, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two values")
    mean = 0.0
    comp = 0.0
    m2 = 0.0
    for k, v in enumerate(x.tolist(), start=1):
        delta = v - mean
        step = delta / k - comp
        new_mean = mean + step
        comp = (new_mean - mean) - step
        mean = new_mean
        m2 += delta * (v - mean)
    n = x.size
    var = max(m2 / (n - 1), 0.0)
    return MomentSummary(n, mean, var, math.sqrt(var / n), var * math.sqrt(2.0 / (n - 1)))


def moment_check(name: str, summary: MomentSummary, which: str, target: float,
                 tolerance: float, alpha: float, relative: bool = False) -> TestReport:
    """Express ``|moment - target| < tolerance`` as a :class:`TestReport`.

    ``which`` is ``"mean"`` or ``"variance"``; with ``relative`` the
    deviation is divided by ``|target|``.
    """
    value = getattr(summary, which)
    dev = abs(value - target)
    if relative:
        dev /= abs(target)
    return TestReport(name, float(dev), float(tolerance), alpha, dev < tolerance, (summary.count, 0))
