"""Monte Carlo drivers: per-path simulation, the identity suite, convergence sweeps.

Path ``k`` always draws from streams ``3k .. 3k+2`` of the configured seed,
so results depend on ``(seed, k)`` only.  Work is split into contiguous
chunks of path indices and merged back in index order, which keeps every
output byte-identical for any number of workers.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from itertools import combinations
from pathlib import Path

import numpy as np

from . import functionals as fn
from .occupation import jeulin_values, occupation_profile
from .paths import PathGrid, excursion_values
from .rng import RngStream
from .stats import (MomentSummary, TestReport, ks_one_sample_normal, ks_two_sample,
                    moment_check, moment_summary)

log = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-6
X_MEAN_TOL = 0.005
X_VAR_TOL = 0.005
PROP_MEAN_TOL = 0.01
PROP_VAR_RTOL = 0.05
HALF_W_AREA_VAR_TOL = 0.005

STEPS_SWEEP = (2**10, 2**12, 2**14, 2**16)
BIN_SWEEP = (1 / 32, 1 / 64, 1 / 128, 1 / 256)

SIMULATE_CSV = "simulate.csv"
VERIFY_JSON = "verify.json"
CONVERGENCE_CSV = "convergence.csv"


@dataclass
class ExperimentConfig:
    paths: int = 20000
    n_steps: int = 16384
    bin_width: float = 1 / 128
    seed: int = 42
    orders: list = field(default_factory=lambda: [1, 2, 3])
    alpha: float = 0.001
    marginal_times: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    output_dir: str = "results"

    def validate(self) -> "ExperimentConfig":
        def _int(name, least):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < least:
                raise ValueError(f"{name} must be an integer >= {least}, got {v!r}")
            setattr(self, name, int(v))

        _int("paths", 1)
        _int("n_steps", 2)
        if not 0 <= int(self.seed) < 2**64 or int(self.seed) != self.seed:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        self.seed = int(self.seed)
        if not (isinstance(self.bin_width, (int, float)) and self.bin_width > 0):
            raise ValueError(f"bin_width must be positive, got {self.bin_width!r}")
        self.bin_width = float(self.bin_width)
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.orders:
            raise ValueError("orders must be nonempty")
        for n in self.orders:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise ValueError(f"orders must be integers >= 1, got {self.orders!r}")
        self.orders = sorted({int(n) for n in self.orders})
        for t in self.marginal_times:
            if not 0 < t < 1:
                raise ValueError(f"marginal times must lie in (0, 1), got {t!r}")
        self.marginal_times = [float(t) for t in self.marginal_times]
        self.output_dir = str(self.output_dir)
        return self

    @classmethod
    def from_mapping(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d).validate()

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- per path

def _tag(t: float) -> str:
    return f"{t:g}"


def record_columns(config: ExperimentConfig) -> list[str]:
    """Column names of the internal per-path record."""
    top = max(max(config.orders), 2)
    both = sorted(set(config.orders) | {1})
    cols = ["path_index", "area", "l2_half", "x_stat", "w1"]
    cols += [f"min_{n}" for n in config.orders]
    cols += [f"prop_{n}" for n in config.orders]
    cols += [f"inv_fwd_{n}" for n in range(top + 1)]
    cols += [f"inv_rev_{n}" for n in range(1, top + 1)]
    cols += ["max_r"]
    cols += [f"w_area_{n}" for n in both]
    cols += [f"resid_{n}" for n in both]
    cols += [f"jeulin_{_tag(t)}" for t in config.marginal_times]
    cols += [f"r_{_tag(t)}" for t in config.marginal_times]
    return cols


def csv_columns(config: ExperimentConfig) -> list[str]:
    """Header of the ``simulate`` CSV."""
    return (["path_index", "area", "l2_half", "x_stat", "w1"]
            + [f"min_{n}" for n in config.orders]
            + [f"prop_{n}" for n in config.orders]
            + ["inv_fwd_0", "inv_fwd_1", "inv_fwd_2", "inv_rev_1", "inv_rev_2", "max_r"])


def simulate_path(k: int, config: ExperimentConfig) -> list[float]:
    """Every per-path quantity for path index ``k``, in :func:`record_columns` order."""
    path = PathGrid(excursion_values(config.n_steps, RngStream(config.seed, k)))
    profile = occupation_profile(path, config.bin_width)
    s = fn.evaluate(path, profile, config.orders)
    top = max(max(config.orders), 2)
    both = sorted(set(config.orders) | {1})
    times = config.marginal_times
    row = [float(k), s.area, s.l2_half, s.x_stat, s.w_one]
    row += [s.min_n[n] for n in config.orders]
    row += [s.prop_stat[n] for n in config.orders]
    row += [s.inv_weighted[(fn.FORWARD, n)] for n in range(top + 1)]
    row += [s.inv_weighted[(fn.REVERSED, n)] for n in range(1, top + 1)]
    row += [s.path_max]
    row += [s.w_area_weighted[n] for n in both]
    row += [s.residual[n] for n in both]
    row += list(jeulin_values(profile, times))
    row += list(path.at(times))
    return row


def _chunk(args):
    cfg, start, stop = args
    config = ExperimentConfig.from_mapping(cfg)
    return np.array([simulate_path(k, config) for k in range(start, stop)], dtype=float)


def _chunks(n: int, workers: int):
    size = max(1, min(1000, math.ceil(n / (4 * max(workers, 1)))))
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def _run_pool(func, tasks, workers: int):
    if workers <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


@dataclass
class SampleTable:
    columns: list
    data: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def __len__(self) -> int:
        return self.data.shape[0]


def simulate_table(config: ExperimentConfig, workers: int = 1) -> SampleTable:
    config.validate()
    cfg = config.to_dict()
    tasks = [(cfg, a, b) for a, b in _chunks(config.paths, workers)]
    blocks = _run_pool(_chunk, tasks, workers)
    return SampleTable(record_columns(config), np.vstack(blocks))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run_simulate(config: ExperimentConfig, workers: int = 1) -> SampleTable:
    """Simulate ``config.paths`` excursions and write ``simulate.csv``."""
    table = simulate_table(config, workers)
    header = csv_columns(config)
    idx = [table.columns.index(c) for c in header]
    rows = ([str(int(r[0]))] + [_fmt(x) for x in r[idx[1:]]] for r in table.data)
    write_csv(Path(config.output_dir) / SIMULATE_CSV, header, rows)
    return SampleTable(header, table.data[:, idx])


# ---------------------------------------------------------------- verify

@dataclass
class IdentitySuiteReport:
    config: dict
    tests: list
    moments: list
    overall_pass: bool

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "tests": [t.to_dict() for t in self.tests],
            "moments": [{"name": n, **m.to_dict()} for n, m in self.moments],
            "overall_pass": self.overall_pass,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary_lines(self) -> list[str]:
        return [f"{'PASS' if t.passed else 'FAIL'}  {t.name:<40s} stat={t.statistic:.6g} "
                f"thr={t.threshold:.6g}" for t in self.tests]


def recompute_overall(report_dict: dict) -> bool:
    """``overall_pass`` from the persisted test list alone."""
    return all(TestReport.from_dict(t).passed for t in report_dict["tests"])


def identity_suite(table: SampleTable, config: ExperimentConfig) -> IdentitySuiteReport:
    """Assemble the full battery of tests from a per-path table.

    Two-sample comparisons always take the first functional from paths
    ``[0, P/2)`` and the second from ``[P/2, P)``.
    """
    a = config.alpha
    half = len(table) // 2
    if half < 1:
        raise ValueError("the identity suite needs at least two paths")
    A = slice(0, half)
    B = slice(half, 2 * half)
    tests: list[TestReport] = []
    moments: list[tuple[str, MomentSummary]] = []

    def col(name, part=slice(None), scale=1.0):
        return scale * table[name][part]

    def summary(name, xs):
        m = moment_summary(xs)
        moments.append((name, m))
        return m

    # Gaussian law of X
    x = col("x_stat")
    tests.append(ks_one_sample_normal(x, 0.0, 1 / 12, a, name="X ~ N(0,1/12)"))
    m = summary("x_stat", x)
    tests.append(moment_check("X mean", m, "mean", 0.0, X_MEAN_TOL, a))
    tests.append(moment_check("X variance", m, "variance", 1 / 12, X_VAR_TOL, a))

    # order-n extension
    for n in config.orders:
        p = col(f"prop_{n}")
        var = 1 / (2 * n + 1)
        tests.append(ks_one_sample_normal(p, 0.0, var, a, name=f"prop_{n} ~ N(0,1/{2 * n + 1})"))
        m = summary(f"prop_{n}", p)
        tests.append(moment_check(f"prop_{n} mean", m, "mean", 0.0, PROP_MEAN_TOL, a))
        tests.append(moment_check(f"prop_{n} variance (rel)", m, "variance", var,
                                  PROP_VAR_RTOL, a, relative=True))

    # four functionals with the law of the area
    same_law = {
        "area": ("area", 1.0),
        "half_l2": ("l2_half", 1.0),
        "half_inv_fwd_1": ("inv_fwd_1", 0.5),
        "half_inv_rev_1": ("inv_rev_1", 0.5),
    }
    for (na, (ca, sa)), (nb, (cb, sb)) in combinations(same_law.items(), 2):
        tests.append(ks_two_sample(col(ca, A, sa), col(cb, B, sb), a, name=f"{na} =d {nb}"))

    # maximum and the min-functional sequence
    tests.append(ks_two_sample(col("max_r", A), col("inv_fwd_0", B, 0.5), a,
                               name="max_r =d half_inv_fwd_0"))
    for n in config.orders:
        mn = col(f"min_{n}", A)
        tests.append(ks_two_sample(mn, col(f"inv_fwd_{n}", B, 0.5), a,
                                   name=f"min_{n} =d half_inv_fwd_{n}"))
        tests.append(ks_two_sample(mn, col(f"inv_rev_{n}", B, 0.5), a,
                                   name=f"min_{n} =d half_inv_rev_{n}"))

    # time-changed local time against the excursion
    for t in config.marginal_times:
        tag = _tag(t)
        tests.append(ks_two_sample(col(f"jeulin_{tag}", A), col(f"r_{tag}", B), a,
                                   name=f"jeulin({tag}) =d r({tag})"))

    # Brownian motion built from the excursion
    tests.append(ks_one_sample_normal(col("w1"), 0.0, 1.0, a, name="W_1 ~ N(0,1)"))
    m = summary("half_w_area", col("w_area_1", scale=0.5))
    tests.append(moment_check("half_w_area variance", m, "variance", 1 / 12,
                              HALF_W_AREA_VAR_TOL, a))
    for n in config.orders:
        if n > 1:
            summary(f"w_area_{n}", col(f"w_area_{n}"))
    summary("w1", col("w1"))

    # pathwise identities
    for n in sorted(set(config.orders) | {1}):
        r = col(f"resid_{n}")
        tests.append(TestReport(f"pathwise residual order {n} (max)", float(np.max(r)),
                                RESIDUAL_TOLERANCE, a, bool(np.max(r) < RESIDUAL_TOLERANCE),
                                (len(r), 0)))

    overall = all(t.passed for t in tests)
    return IdentitySuiteReport(config.to_dict(), tests, moments, overall)


def run_verify(config: ExperimentConfig, workers: int = 1) -> IdentitySuiteReport:
    """Run the identity suite and write ``verify.json``."""
    table = simulate_table(config, workers)
    report = identity_suite(table, config)
    out = Path(config.output_dir) / VERIFY_JSON
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json())
    return report


# ---------------------------------------------------------------- convergence

def _convergence_chunk(args):
    seed, n_steps, bins, start, stop = args
    out = np.empty((stop - start, len(bins) + 1))
    for i, k in enumerate(range(start, stop)):
        path = PathGrid(excursion_values(n_steps, RngStream(seed, k)))
        area = fn.weighted_area(path, 1)
        for j, h in enumerate(bins):
            out[i, j] = area - 0.5 * fn.l2_integral(occupation_profile(path, h), 1)
        out[i, -1] = fn.gauss_identity_residual(path, 1)
    return out


CONVERGENCE_HEADER = ["n_steps", "bin_width", "paths", "mean_x", "var_x",
                      "abs_var_error", "max_residual"]


def convergence_table(config: ExperimentConfig, workers: int = 1,
                      steps=STEPS_SWEEP, bins=BIN_SWEEP) -> list[list[float]]:
    """One row per ``(n_steps, bin_width)`` cell, ``n_steps`` outermost."""
    config.validate()
    rows = []
    for n_steps in steps:
        tasks = [(config.seed, n_steps, tuple(bins), a, b) for a, b in _chunks(config.paths, workers)]
        data = np.vstack(_run_pool(_convergence_chunk, tasks, workers))
        resid = float(data[:, -1].max())
        for j, h in enumerate(bins):
            m = moment_summary(data[:, j]) if config.paths >= 2 else None
            var = m.variance if m else float("nan")
            rows.append([n_steps, h, config.paths, m.mean if m else float(data[0, j]),
                         var, abs(var - 1 / 12), resid])
        log.info("convergence: n_steps=%d done", n_steps)
    return rows


def run_convergence(config: ExperimentConfig, workers: int = 1,
                    steps=STEPS_SWEEP, bins=BIN_SWEEP) -> list[list[float]]:
    """Sweep grid resolution and bin width; write ``convergence.csv``."""
    rows = convergence_table(config, workers, steps, bins)
    out = ([str(int(r[0])), _fmt(r[1]), str(int(r[2]))] + [_fmt(x) for x in r[3:]] for r in rows)
    write_csv(Path(config.output_dir) / CONVERGENCE_CSV, CONVERGENCE_HEADER, out)
    return rows
