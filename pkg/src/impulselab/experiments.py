"""Monte Carlo estimation of path-distance moments across a noise grid.

For each epsilon the harness simulates M replicas, aligns each noisy path
with the deterministic trajectory through the good-set time distortion
(identity off the good set), records the chosen upper bound of the Skorohod
distance, and averages its beta-th power. A log-log least squares fit across
the epsilon grid estimates the convergence rate. The refined mode couples a
first-order correction to the same replicas and reports both distance sets
so baseline and refinement can be compared seed for seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cadlag import build_aligning_distortion, skorohod_upper
from .errors import ConfigError, DataError, ParameterError
from .fluctuation import first_order_on_grid, fluctuation_trace
from .stochastic import NoiseParams, classify_good_set, simulate_batch
from .system import SystemSpec, integrate_deterministic, simulation_grid, solution_to_path


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid, replica budget, moment order, and good-set exponent."""

    eps_grid: tuple
    replicas: int
    beta: int
    nu: float
    p: float
    dt: float
    horizon: float
    master_seed: int
    chunk_size: int = 250

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        object.__setattr__(self, "eps_grid", grid)
        if len(grid) == 0:
            raise ConfigError("epsilon grid must not be empty")
        if any(not (0.0 < e < 1.0) for e in grid):
            raise ConfigError("every epsilon must lie in (0, 1)")
        if self.replicas < 1:
            raise ConfigError("replica count must be positive")
        if self.beta not in (1, 2):
            raise ConfigError("moment order beta must be 1 or 2")
        if not (1.0 < self.nu < self.p):
            raise ConfigError("good-set exponent nu must lie in (1, p)")
        if self.dt <= 0.0 or self.horizon <= 0.0:
            raise ConfigError("step and horizon must be positive")
        if self.chunk_size < 1:
            raise ConfigError("chunk size must be positive")


@dataclass(frozen=True)
class EpsilonRow:
    epsilon: float
    mean_distance: float
    stderr: float
    bad_freq: float
    replicas: int


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float


@dataclass(frozen=True)
class ExperimentReport:
    mode: str
    beta: int
    nu: float
    p: float
    seed: int
    rows: tuple
    fit: RateFit | None
    baseline_rows: tuple | None = None
    baseline_fit: RateFit | None = None


def fit_rate(points) -> RateFit:
    """Least squares of log(mean) on log(epsilon); needs >= 3 positive points."""
    pts = [(float(e), float(m)) for e, m in points]
    if len(pts) < 3:
        raise DataError("rate fit needs at least 3 points")
    if any(m <= 0.0 for _, m in pts):
        raise DataError("rate fit needs positive means")
    x = np.log([e for e, _ in pts])
    y = np.log([m for _, m in pts])
    n = x.shape[0]
    (slope, intercept), residuals, *_ = np.polyfit(x, y, 1, full=True)
    sxx = float(np.sum((x - x.mean()) ** 2))
    if n > 2:
        rss = float(residuals[0]) if residuals.size else float(np.sum((y - slope * x - intercept) ** 2))
        stderr = math.sqrt(rss / (n - 2) / sxx)
    else:
        stderr = 0.0
    return RateFit(slope=float(slope), intercept=float(intercept), slope_stderr=stderr)


def ks_test(sample, cdf, level: float = 0.01):
    """One-sample Kolmogorov-Smirnov check at the given level.

    Returns (statistic, passed) with the asymptotic critical value
    sqrt(-ln(level/2)/2)/sqrt(n).
    """
    data = np.sort(np.asarray(sample, dtype=float))
    n = data.shape[0]
    if n < 100:
        raise DataError("Kolmogorov-Smirnov check needs at least 100 samples")
    if not (0.0 < level < 1.0):
        raise ParameterError("level must lie in (0, 1)")
    values = np.asarray(cdf(data), dtype=float)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    statistic = float(np.max(np.maximum(np.abs(values - upper), np.abs(values - lower))))
    critical = math.sqrt(-0.5 * math.log(level / 2.0)) / math.sqrt(n)
    return statistic, statistic < critical


def _row(epsilon: float, powered: np.ndarray, bad: int) -> EpsilonRow:
    m = powered.shape[0]
    mean = float(np.mean(powered))
    stderr = float(np.std(powered, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return EpsilonRow(epsilon=epsilon, mean_distance=mean, stderr=stderr,
                      bad_freq=bad / m, replicas=m)


def _maybe_fit(rows) -> RateFit | None:
    if len(rows) < 3:
        return None
    return fit_rate([(r.epsilon, r.mean_distance) for r in rows])


def _run(config: ExperimentConfig, spec: SystemSpec, compute_refined: bool,
         zero_fluctuation: bool):
    """Shared driver. Returns (baseline rows, refined rows or None)."""
    if compute_refined and spec.drift_derivative is None:
        raise ParameterError("refined mode needs the drift derivative on the system")
    grid = simulation_grid(spec.alpha, config.horizon, config.dt)
    det = integrate_deterministic(spec, grid)
    det_path = solution_to_path(spec, det)
    det_times = grid.impulse_times()
    n_impulses = grid.n_impulses
    base_rows, refined_rows = [], []
    for eps in config.eps_grid:
        delta = eps ** config.nu
        if delta >= spec.alpha / 4.0:
            raise ConfigError(f"epsilon {eps} gives delta {delta:.4g} >= alpha/4; "
                              "good-set classification is undefined there")
        noise = NoiseParams(epsilon=eps, p=config.p, sigma=1, zeta=0.0)
        base_d = np.empty(config.replicas)
        refined_d = np.empty(config.replicas) if compute_refined else None
        bad = 0
        for offset in range(0, config.replicas, config.chunk_size):
            count = min(config.chunk_size, config.replicas - offset)
            batch = simulate_batch(spec, noise, config.horizon, config.dt,
                                   config.master_seed, count, replica_offset=offset,
                                   store_increments=compute_refined and not zero_fluctuation)
            if compute_refined and not zero_fluctuation:
                trace = fluctuation_trace(spec, det, batch.w_increments)
            else:
                trace = None
            for i in range(count):
                schedule = batch.schedule(i)
                record = classify_good_set(schedule, spec.alpha, n_impulses, delta)
                bad += 0 if record.is_good else 1
                distortion = build_aligning_distortion(det_times, schedule.times,
                                                       config.horizon, record.is_good)
                noisy = batch.path(i)
                base_d[offset + i] = skorohod_upper(det_path, noisy, distortion)
                if compute_refined:
                    if trace is None:
                        refined_d[offset + i] = base_d[offset + i]
                        continue
                    values, pre, post = trace
                    approx = first_order_on_grid(spec, det, values[:, i],
                                                 pre[:, i], post[:, i], eps)
                    refined_d[offset + i] = skorohod_upper(approx, noisy, distortion)
        base_rows.append(_row(eps, base_d ** config.beta, bad))
        if compute_refined:
            refined_rows.append(_row(eps, refined_d ** config.beta, bad))
    return base_rows, refined_rows if compute_refined else None


def lln_experiment(config: ExperimentConfig, spec: SystemSpec) -> ExperimentReport:
    """Distance between the noisy path and the deterministic trajectory."""
    rows, _ = _run(config, spec, compute_refined=False, zero_fluctuation=False)
    return ExperimentReport(mode="lln", beta=config.beta, nu=config.nu, p=config.p,
                            seed=config.master_seed, rows=tuple(rows),
                            fit=_maybe_fit(rows))


def clt_experiment(config: ExperimentConfig, spec: SystemSpec,
                   zero_fluctuation: bool = False) -> ExperimentReport:
    """Distance to the first-order refinement, with the baseline alongside.

    `zero_fluctuation` forces the correction to zero; the refined numbers then
    reproduce the baseline exactly (diagnostic degeneracy).
    """
    base_rows, refined_rows = _run(config, spec, compute_refined=True,
                                   zero_fluctuation=zero_fluctuation)
    return ExperimentReport(mode="clt", beta=config.beta, nu=config.nu, p=config.p,
                            seed=config.master_seed, rows=tuple(refined_rows),
                            fit=_maybe_fit(refined_rows),
                            baseline_rows=tuple(base_rows),
                            baseline_fit=_maybe_fit(base_rows))
