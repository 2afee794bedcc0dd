"""First-order fluctuation correction around the deterministic trajectory.

Between impulses the radial correction R1 solves dR1 = b'(r(t)) R1 dt + dW,
driven by the same Brownian increments as a coupled noisy simulation; at each
deterministic impulse time kα it is rescaled by h'(r-), the reset slope at the
pre-impulse radius, and R1(0) = 0. The angular correction is identically zero
because the angular noise enters only at order epsilon^p with p > 1. The
first-order approximation of the noisy system is then x(t) + epsilon*Z(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cadlag import CadlagPath, Segment, assemble_from_grid
from .errors import AlignmentError, ParameterError
from .stochastic import BrownianRecord
from .system import DeterministicSolution, SystemSpec


@dataclass(frozen=True, eq=False)
class FluctuationPath:
    """Correction pair Z = (R1, Theta1) with the seed of its driving noise.

    Theta1 is identically zero; it is carried explicitly so that Z has the
    same shape as the state. Jumps of R1 sit exactly at the deterministic
    impulse times, never at the noisy ones.
    """

    r1: CadlagPath
    theta1: CadlagPath
    seed_entropy: int
    spawn_key: tuple

    def __post_init__(self):
        if self.r1.dim != 1 or self.theta1.dim != 1:
            raise ParameterError("fluctuation components must be scalar paths")
        if self.r1.horizon != self.theta1.horizon:
            raise AlignmentError("fluctuation components disagree on the horizon")


def _check_coupling(spec: SystemSpec, det: DeterministicSolution, times: np.ndarray) -> None:
    if spec.drift_derivative is None:
        raise ParameterError("fluctuation dynamics need the drift derivative; "
                             "construct the system from a drift model that provides one")
    grid_times = det.grid.times
    if times.shape != grid_times.shape or not np.array_equal(times, grid_times):
        raise AlignmentError("Brownian record grid does not match the deterministic grid")


def fluctuation_trace(spec: SystemSpec, det: DeterministicSolution,
                      w_increments: np.ndarray):
    """Euler recursion for R1, vectorised over replica columns.

    `w_increments` has shape (n_steps,) or (n_steps, M) and holds raw (unit
    noise scale) Brownian increments on the deterministic grid. Returns
    (values, pre, post): grid samples with the post-impulse convention at
    impulse indices, plus pre/post values at each impulse.
    """
    single = w_increments.ndim == 1
    w_inc = w_increments[:, None] if single else w_increments
    grid = det.grid
    steps = grid.steps
    n = steps.shape[0]
    if w_inc.shape[0] != n:
        raise AlignmentError("increment count does not match the grid step count")
    growth = 1.0 + np.asarray(spec.drift_derivative(det.r_values[:-1]), dtype=float) * steps
    slopes = np.asarray(spec.reset_derivative(det.pre_radii), dtype=float)
    at_boundary = {int(idx): k for k, idx in enumerate(grid.boundary_indices)}
    m = w_inc.shape[1]
    values = np.empty((n + 1, m))
    values[0] = 0.0
    pre = np.empty((slopes.shape[0], m))
    post = np.empty_like(pre)
    cur = np.zeros(m)
    for j in range(n):
        cur = growth[j] * cur + w_inc[j]
        k = at_boundary.get(j + 1)
        if k is not None:
            pre[k] = cur
            cur = slopes[k] * cur
            post[k] = cur
        values[j + 1] = cur
    if single:
        return values[:, 0], pre[:, 0], post[:, 0]
    return values, pre, post


def fluctuation_path(spec: SystemSpec, det: DeterministicSolution,
                     record: BrownianRecord) -> FluctuationPath:
    """Correction Z driven by `record` on the deterministic grid."""
    _check_coupling(spec, det, record.times)
    values, pre, post = fluctuation_trace(spec, det, record.w_increments)
    grid = det.grid
    jump_times = grid.impulse_times()
    r1 = assemble_from_grid(grid.horizon, grid.times, values[:, None],
                            jump_times, pre[:, None], post[:, None])
    zeros = np.zeros((grid.times.shape[0], 1))
    n_imp = jump_times.shape[0]
    theta1 = assemble_from_grid(grid.horizon, grid.times, zeros,
                                jump_times, np.zeros((n_imp, 1)), np.zeros((n_imp, 1)))
    return FluctuationPath(r1=r1, theta1=theta1,
                           seed_entropy=record.seed_entropy,
                           spawn_key=record.spawn_key)


def _segments_aligned(a: CadlagPath, b: CadlagPath) -> bool:
    if a.horizon != b.horizon or len(a.segments) != len(b.segments):
        return False
    return all(np.array_equal(sa.times, sb.times)
               for sa, sb in zip(a.segments, b.segments))


def first_order_approximation(det: CadlagPath, z: FluctuationPath,
                              epsilon: float) -> CadlagPath:
    """Path x + epsilon*Z, componentwise; jumps stay at the deterministic times."""
    if epsilon < 0.0:
        raise ParameterError("epsilon must be nonnegative")
    if det.dim != 2:
        raise AlignmentError("expected a two-component (radius, angle) path")
    if not (_segments_aligned(det, z.r1) and _segments_aligned(det, z.theta1)):
        raise AlignmentError("correction and deterministic path live on different grids")
    segments = []
    for seg, seg_r, seg_t in zip(det.segments, z.r1.segments, z.theta1.segments):
        correction = np.concatenate([seg_r.values, seg_t.values], axis=1)
        segments.append(Segment(times=seg.times, values=seg.values + epsilon * correction))
    return CadlagPath(det.horizon, segments, jump_times=det.jump_times)


def first_order_on_grid(spec: SystemSpec, det: DeterministicSolution,
                        trace_values: np.ndarray, trace_pre: np.ndarray,
                        trace_post: np.ndarray, epsilon: float) -> CadlagPath:
    """Assemble x + epsilon*Z directly from one column of a batched trace."""
    grid = det.grid
    combined = np.stack([det.r_values + epsilon * trace_values, det.theta_values], axis=1)
    n_imp = trace_pre.shape[0]
    pre_states = np.stack([det.pre_radii + epsilon * trace_pre, np.full(n_imp, spec.alpha)], axis=1)
    post_states = np.stack([det.post_radii + epsilon * trace_post, np.zeros(n_imp)], axis=1)
    return assemble_from_grid(grid.horizon, grid.times, combined,
                              grid.impulse_times(), pre_states, post_states)
