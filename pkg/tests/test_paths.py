import math

import numpy as np
import pytest
from scipy import integrate, stats

from excursion_lab import PathGrid, RngStream, sample_brownian_bridge, sample_excursion
from excursion_lab.paths import excursion_values

SIGMA = 0.5  # per-component sd of the 3-d bridge at t = 1/2


def maxwell_pdf(x, s=SIGMA):
    return math.sqrt(2 / math.pi) * x * x / s**3 * math.exp(-x * x / (2 * s * s))


def maxwell_cdf_quad(x):
    return integrate.quad(maxwell_pdf, 0.0, x, epsabs=1e-13)[0]


def maxwell_cdf_closed(x, s=SIGMA):
    return math.erf(x / (s * math.sqrt(2))) - math.sqrt(2 / math.pi) * x / s * math.exp(-x * x / (2 * s * s))


# frozen from maxwell_cdf_quad; mean sqrt(2/pi) by quadrature of x * pdf
MAXWELL_MEAN = 0.7978845608028654


def test_maxwell_oracle_consistent():
    for x in (0.1, 0.5, 0.8, 1.3, 2.5):
        assert maxwell_cdf_quad(x) == pytest.approx(maxwell_cdf_closed(x), abs=1e-12)
    mean = integrate.quad(lambda x: x * maxwell_pdf(x), 0, np.inf)[0]
    assert mean == pytest.approx(MAXWELL_MEAN, abs=1e-12)
    assert mean == pytest.approx(math.sqrt(2 / math.pi), abs=1e-14)


def test_maxwell_mean_brute_force_monte_carlo():
    # independent of the package: three N(0, 1/4) coordinates directly
    g = np.random.default_rng(2024).normal(0.0, SIGMA, size=(400_000, 3))
    r = np.linalg.norm(g, axis=1)
    assert abs(r.mean() - MAXWELL_MEAN) < 4 * r.std() / math.sqrt(r.size)


def test_rng_stream_reproducible_and_distinct():
    a = RngStream(42, 7).normals(100)
    assert np.array_equal(a, RngStream(42, 7).normals(100))
    assert not np.array_equal(a, RngStream(42, 8).normals(100))
    assert not np.array_equal(a, RngStream(43, 7).normals(100))
    assert RngStream(42, 7).substream(2) == RngStream(42, 23)


def test_rng_stream_rejects_bad_seed():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    with pytest.raises(ValueError):
        RngStream(0, 2**64)


def test_rng_streams_uncorrelated():
    z = np.array([RngStream(1, k).normals(2000) for k in range(50)])
    c = np.corrcoef(z)
    off = c[~np.eye(50, dtype=bool)]
    assert np.max(np.abs(off)) < 5 / math.sqrt(2000)


def test_bridge_pinned():
    for k in range(5):
        p = sample_brownian_bridge(2, RngStream(3, k))
        assert p.values[0] == 0.0 and p.values[2] == 0.0
    p = sample_brownian_bridge(1000, RngStream(3, 99))
    assert p.values[0] == 0.0 and p.values[-1] == 0.0


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5])
def test_bridge_rejects_small_grid(bad):
    with pytest.raises(ValueError):
        sample_brownian_bridge(bad, RngStream(0, 0))
    with pytest.raises(ValueError):
        sample_excursion(bad, RngStream(0, 0))


def test_bridge_moments():
    n_paths, n = 100_000, 1024
    total = np.zeros(n + 1)
    mid = np.empty(n_paths)
    for k in range(n_paths):
        v = sample_brownian_bridge(n, RngStream(11, k)).values
        total += v
        mid[k] = v[n // 2]
    var = mid.var(ddof=1)
    se_var = var * math.sqrt(2 / (n_paths - 1))
    assert abs(var - 0.25) < 3 * se_var
    t = np.arange(n + 1) / n
    sd = np.sqrt(t * (1 - t))[1:-1]
    means = total[1:-1] / n_paths
    assert np.all(np.abs(means) < 4 * sd / math.sqrt(n_paths))


def test_excursion_pinned_and_nonnegative():
    for k in range(20):
        p = sample_excursion(256, RngStream(5, k))
        assert p.values[0] == 0.0 and p.values[-1] == 0.0
        assert p.values.min() >= 0.0
        assert np.all(p.values[1:-1] > 0)


def test_excursion_is_norm_of_component_bridges():
    s = RngStream(8, 3)
    b = [sample_brownian_bridge(64, RngStream(8, 9 + j)).values for j in range(3)]
    expected = np.sqrt(b[0] ** 2 + b[1] ** 2 + b[2] ** 2)
    assert np.array_equal(sample_excursion(64, s).values, expected)


def test_excursion_reproducible():
    a = excursion_values(512, RngStream(42, 17))
    b = excursion_values(512, RngStream(42, 17))
    assert np.array_equal(a, b)


def test_excursion_midpoint_maxwell():
    n_paths, n = 100_000, 4096
    r = np.array([excursion_values(n, RngStream(21, k))[n // 2] for k in range(n_paths)])
    se = r.std(ddof=1) / math.sqrt(n_paths)
    assert abs(r.mean() - MAXWELL_MEAN) < 3 * se
    cdf = np.vectorize(maxwell_cdf_closed)
    res = stats.kstest(r, cdf)
    assert res.pvalue > 0.001


def test_pathgrid_is_readonly_and_interpolates():
    p = PathGrid([0.0, 1.0, 0.0])
    assert p.n_steps == 2
    with pytest.raises(ValueError):
        p.values[0] = 3.0
    assert p.at(0.25) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        PathGrid([1.0])
