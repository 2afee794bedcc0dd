"""Planar impulsive system: radial drift, unit angular speed, reset at a wedge.

State (r, theta) evolves by dr/dt = b(r), dtheta/dt = 1 inside the wedge
0 <= theta < alpha. When theta reaches alpha, the state is reset to
(h(r), 0). With theta(0) = 0 the impulse times are exactly t_k = k*alpha, so
the radial flow can be integrated segment by segment with a fixed-step RK4
scheme whose final partial step lands on each impulse time exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .cadlag import CadlagPath, assemble_from_grid
from .errors import HorizonError, ParameterError, ResolutionError

TWO_PI = 2.0 * math.pi
_PROBE_POINTS = 161


@dataclass(frozen=True)
class DriftModel:
    """Radial drift callable with its derivative and a uniform bound."""

    fn: Callable
    derivative: Callable
    bound: float


@dataclass(frozen=True)
class ResetModel:
    """Reset map callable with its derivative and a sup bound on the slope."""

    fn: Callable
    derivative: Callable
    slope_bound: float


def constant_drift(c: float) -> DriftModel:
    """b(r) = c. The bound |c| also covers the (zero) derivatives."""
    c = float(c)
    return DriftModel(fn=lambda r: np.full_like(np.asarray(r, dtype=float), c),
                      derivative=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                      bound=abs(c))


def tanh_drift(c: float) -> DriftModel:
    """b(r) = c*tanh(r); |b|, |b'|, |b''| are all bounded by |c|."""
    c = float(c)
    return DriftModel(fn=lambda r: c * np.tanh(r),
                      derivative=lambda r: c / np.cosh(r) ** 2,
                      bound=abs(c))


def linear_reset(kappa: float) -> ResetModel:
    """h(r) = kappa*r with kappa > 0."""
    kappa = float(kappa)
    if kappa <= 0:
        raise ParameterError("linear reset slope must be positive")
    return ResetModel(fn=lambda r: kappa * np.asarray(r, dtype=float),
                      derivative=lambda r: np.full_like(np.asarray(r, dtype=float), kappa),
                      slope_bound=kappa)


def saturating_reset(scale: float) -> ResetModel:
    """h(r) = scale*r/(1+|r|), extended oddly; steepest at the origin."""
    scale = float(scale)
    if scale <= 0:
        raise ParameterError("saturating reset scale must be positive")

    def fn(r):
        r = np.asarray(r, dtype=float)
        return scale * r / (1.0 + np.abs(r))

    def derivative(r):
        r = np.asarray(r, dtype=float)
        return scale / (1.0 + np.abs(r)) ** 2

    return ResetModel(fn=fn, derivative=derivative, slope_bound=scale)


def _odd_pchip(xs: np.ndarray, ys: np.ndarray) -> PchipInterpolator:
    # Mirror the table through the origin so the interpolant is odd.
    xs_full = np.concatenate([-xs[::-1], xs[1:]]) if xs[0] == 0 else np.concatenate([-xs[::-1], xs])
    ys_full = np.concatenate([-ys[::-1], ys[1:]]) if xs[0] == 0 else np.concatenate([-ys[::-1], ys])
    return PchipInterpolator(xs_full, ys_full, extrapolate=True)


def table_drift(points) -> DriftModel:
    """Monotone-cubic interpolation of tabulated (r, b(r)) pairs.

    Outside the table hull the drift is clamped to its boundary values, so it
    stays bounded on all of R as the model assumes.
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs.shape[0] < 2 or np.any(np.diff(xs) <= 0):
        raise ParameterError("drift table needs >= 2 strictly increasing abscissae")
    interp = PchipInterpolator(xs, ys, extrapolate=False)
    deriv_in = interp.derivative()
    lo, hi = float(xs[0]), float(xs[-1])

    def fn(r):
        return np.asarray(interp(np.clip(r, lo, hi)), dtype=float)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        inside = (r >= lo) & (r <= hi)
        return np.where(inside, deriv_in(np.clip(r, lo, hi)), 0.0)

    grid = np.linspace(lo, hi, 401)
    bound = 1.05 * max(float(np.max(np.abs(interp(grid)))),
                       float(np.max(np.abs(deriv_in(grid)))),
                       float(np.max(np.abs(interp.derivative(2)(grid)))))
    return DriftModel(fn=fn, derivative=derivative, bound=bound)


def table_reset(points) -> ResetModel:
    """Monotone-cubic reset through tabulated (r, h(r)) pairs with h(0) = 0."""
    pts = sorted((float(x), float(y)) for x, y in points)
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs.shape[0] < 2 or np.any(np.diff(xs) <= 0):
        raise ParameterError("reset table needs >= 2 strictly increasing abscissae")
    if xs[0] < 0 or (xs[0] == 0 and ys[0] != 0):
        raise ParameterError("reset table must cover r >= 0 with h(0) = 0")
    if xs[0] > 0:
        xs = np.concatenate([[0.0], xs])
        ys = np.concatenate([[0.0], ys])
    if np.any(np.diff(ys) <= 0):
        raise ParameterError("reset table values must strictly increase")
    interp = _odd_pchip(xs, ys)
    deriv_in = interp.derivative()
    hi = float(xs[-1])
    hi_val = float(ys[-1])
    # Beyond the table hull, continue with the final chord slope so the odd
    # extension stays strictly increasing on all of R.
    tail_slope = float((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))

    def fn(r):
        r = np.asarray(r, dtype=float)
        inside = np.abs(r) <= hi
        out = np.asarray(interp(np.clip(r, -hi, hi)), dtype=float)
        return np.where(inside, out, np.sign(r) * (hi_val + (np.abs(r) - hi) * tail_slope))

    def derivative(r):
        r = np.asarray(r, dtype=float)
        inside = np.abs(r) <= hi
        return np.where(inside, deriv_in(np.clip(r, -hi, hi)), tail_slope)

    grid = np.linspace(0.0, hi, 401)
    slope = 1.05 * max(float(np.max(np.abs(deriv_in(grid)))), tail_slope)
    return ResetModel(fn=fn, derivative=derivative, slope_bound=slope)


@dataclass(frozen=True)
class SystemSpec:
    """Immutable description of one impulsive system instance.

    Callables must accept numpy arrays. Bounds are spot-checked on a sample
    grid at construction; they are trusted thereafter.
    """

    drift: Callable
    drift_bound: float
    reset: Callable
    reset_derivative: Callable
    reset_slope_bound: float
    alpha: float
    r0: float
    theta0: float = 0.0
    drift_derivative: Callable | None = None

    def __post_init__(self):
        if not (0.0 < self.alpha < TWO_PI):
            raise ParameterError("alpha must lie in (0, 2*pi)")
        if self.r0 <= 0:
            raise ParameterError("initial radius must be positive")
        if self.theta0 != 0.0:
            raise ParameterError("initial angle must be 0")
        if self.drift_bound < 0 or self.reset_slope_bound <= 0:
            raise ParameterError("drift bound must be nonnegative and reset slope bound positive")
        span = max(8.0, 4.0 * self.r0)
        rs = np.linspace(0.0, span, _PROBE_POINTS)
        h = np.asarray(self.reset(rs), dtype=float)
        if abs(float(h[0])) > 1e-12 * max(1.0, self.reset_slope_bound):
            raise ParameterError("reset map must fix the origin")
        if np.any(np.diff(h) <= 0):
            raise ParameterError("reset map must be strictly increasing")
        hp = np.abs(np.asarray(self.reset_derivative(rs), dtype=float))
        if float(np.max(hp)) > self.reset_slope_bound * (1 + 1e-9):
            raise ParameterError("sampled reset slope exceeds its declared bound")
        rb = np.linspace(-span, span, _PROBE_POINTS)
        b = np.abs(np.asarray(self.drift(rb), dtype=float))
        if float(np.max(b)) > self.drift_bound * (1 + 1e-9):
            raise ParameterError("sampled drift exceeds its declared bound")

    @classmethod
    def from_models(cls, drift: DriftModel, reset: ResetModel, alpha: float, r0: float) -> "SystemSpec":
        return cls(drift=drift.fn, drift_bound=drift.bound,
                   reset=reset.fn, reset_derivative=reset.derivative,
                   reset_slope_bound=reset.slope_bound,
                   alpha=float(alpha), r0=float(r0),
                   drift_derivative=drift.derivative)

    @property
    def log_slope_excess(self) -> float:
        """log of max(reset slope bound, 1); zero for contractive resets."""
        return math.log(max(self.reset_slope_bound, 1.0))


@dataclass(frozen=True)
class ImpulseSchedule:
    """Impulse times with radial left limits and post-reset values."""

    times: np.ndarray
    pre_values: np.ndarray
    post_values: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.times, dtype=float))
        pre = np.atleast_1d(np.asarray(self.pre_values, dtype=float))
        post = np.atleast_1d(np.asarray(self.post_values, dtype=float))
        if not (t.shape == pre.shape == post.shape):
            raise ParameterError("schedule arrays must have matching shapes")
        if t.shape[0] >= 2 and np.any(np.diff(t) <= 0):
            raise ParameterError("impulse times must strictly increase")
        for name, arr in (("times", t), ("pre_values", pre), ("post_values", post)):
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.times.shape[0]


@dataclass(frozen=True)
class SimulationGrid:
    """Time grid on [0, T] whose points include every impulse time k*alpha."""

    times: np.ndarray
    steps: np.ndarray
    boundary_indices: np.ndarray
    alpha: float
    horizon: float
    dt: float

    @property
    def n_impulses(self) -> int:
        return self.boundary_indices.shape[0]

    def impulse_times(self) -> np.ndarray:
        return self.times[self.boundary_indices]


def simulation_grid(alpha: float, horizon: float, dt: float) -> SimulationGrid:
    """Segment-aligned grid: uniform steps of dt, shortened to land on k*alpha."""
    if dt <= 0:
        raise ResolutionError("step size must be positive")
    n = int(math.floor(horizon / alpha + 1e-12))
    frac = horizon / alpha - n
    if n < 1 or frac <= 1e-9 or frac >= 1 - 1e-9:
        raise HorizonError(
            "horizon must lie strictly between consecutive impulse times "
            f"(got T={horizon!r}, alpha={alpha!r})"
        )
    ends = np.append(alpha * np.arange(1, n + 1), horizon)
    times = [0.0]
    boundary_indices = []
    start = 0.0
    for i, end in enumerate(ends):
        span = end - start
        m = int(math.floor(span / dt + 1e-9))
        inner = start + dt * np.arange(1, m + 1)
        if m >= 1 and end - inner[-1] <= dt * 1e-6:
            inner = inner[:-1]
        times.extend(inner.tolist())
        times.append(end)
        if i < n:
            boundary_indices.append(len(times) - 1)
        start = end
    t = np.asarray(times)
    return SimulationGrid(times=t, steps=np.diff(t),
                          boundary_indices=np.asarray(boundary_indices, dtype=int),
                          alpha=alpha, horizon=horizon, dt=dt)


def _rk4_step(b: Callable, y: float, h: float) -> float:
    k1 = float(b(y))
    k2 = float(b(y + 0.5 * h * k1))
    k3 = float(b(y + 0.5 * h * k2))
    k4 = float(b(y + h * k3))
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class DeterministicSolution:
    """Grid samples of the noiseless flow plus impulse pre/post radii."""

    grid: SimulationGrid
    r_values: np.ndarray
    theta_values: np.ndarray
    pre_radii: np.ndarray
    post_radii: np.ndarray


def integrate_deterministic(spec: SystemSpec, grid: SimulationGrid) -> DeterministicSolution:
    """RK4 radial flow on the grid with resets applied at segment boundaries."""
    n = grid.steps.shape[0]
    r = np.empty(n + 1)
    r[0] = spec.r0
    boundary = set(int(j) for j in grid.boundary_indices)
    pre, post = [], []
    for j in range(n):
        y = _rk4_step(spec.drift, r[j], float(grid.steps[j]))
        if j + 1 in boundary:
            pre.append(y)
            y = float(spec.reset(y))
            post.append(y)
        r[j + 1] = y
    seg_starts = np.concatenate([[0.0], grid.impulse_times()])
    idx = np.searchsorted(grid.times[grid.boundary_indices], grid.times, side="right")
    theta = grid.times - seg_starts[idx]
    return DeterministicSolution(grid=grid, r_values=r, theta_values=theta,
                                 pre_radii=np.asarray(pre), post_radii=np.asarray(post))


def solution_to_path(spec: SystemSpec, sol: DeterministicSolution) -> CadlagPath:
    grid = sol.grid
    values = np.stack([sol.r_values, sol.theta_values], axis=1)
    k = grid.n_impulses
    pre_states = np.stack([sol.pre_radii, np.full(k, spec.alpha)], axis=1)
    post_states = np.stack([sol.post_radii, np.zeros(k)], axis=1)
    return assemble_from_grid(grid.horizon, grid.times, values,
                              grid.impulse_times(), pre_states, post_states)


def deterministic_trajectory(spec: SystemSpec, horizon: float, dt: float):
    """Noiseless trajectory as a (path, impulse schedule) pair.

    Requires dt <= alpha/100 and a horizon strictly inside an inter-impulse
    interval with at least one impulse before it.
    """
    if dt > spec.alpha / 100.0:
        raise ResolutionError("step size must not exceed alpha/100")
    grid = simulation_grid(spec.alpha, horizon, dt)
    sol = integrate_deterministic(spec, grid)
    path = solution_to_path(spec, sol)
    schedule = ImpulseSchedule(times=grid.impulse_times(),
                               pre_values=sol.pre_radii, post_values=sol.post_radii)
    return path, schedule


def impact_count(t: float, alpha: float) -> int:
    """Number of impulse times in (0, t]; an exact multiple counts as reached."""
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    if t < 0:
        raise ParameterError("time must be nonnegative")
    q = t / alpha
    k = int(math.floor(q))
    if q - k > 1.0 - 1e-9:
        k += 1
    return k
