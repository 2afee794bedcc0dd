"""Right-continuous piecewise paths and Skorohod-type distances.

A path on [0, T] is stored as contiguous segments. Within a segment the path
is continuous (sampled values, linearly interpolated); segment boundaries
after the first are the jump times, where the path is right-continuous with a
finite left limit. Distances between two paths are evaluated against a time
distortion lambda: the reported value is

    max( sup_{s<t} |log((lambda(t)-lambda(s))/(t-s))| ,
         sup_t |x1(t) - x2(lambda(t))| )

which upper-bounds the Skorohod J1 distance for any admissible lambda. For a
piecewise-linear lambda the first term equals the max over knot intervals of
|log slope|, because every chord slope is a convex combination of segment
slopes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ComplexityGuardError,
    DataError,
    InvalidDistortionError,
    InvalidInputError,
    ParameterError,
    ShapeError,
)
from ._text import format_float, open_dest

_REL_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=float)
    out.setflags(write=False)
    return out


class Segment(NamedTuple):
    times: np.ndarray   # (m,), strictly increasing
    values: np.ndarray  # (m, d)


class CadlagPath:
    """Piecewise-continuous path with jumps at its interior segment starts."""

    def __init__(self, horizon: float, segments: Sequence[tuple], jump_times=None):
        if not np.isfinite(horizon) or horizon <= 0:
            raise ShapeError(f"horizon must be a positive real, got {horizon!r}")
        segs = []
        for times, values in segments:
            t = _readonly(np.atleast_1d(times))
            v = np.asarray(values, dtype=float)
            if v.ndim == 1:
                v = v[:, None]
            v = _readonly(v)
            if t.shape[0] != v.shape[0]:
                raise ShapeError("segment times and values disagree in length")
            if t.shape[0] >= 2 and not np.all(np.diff(t) > 0):
                raise ShapeError("segment times must be strictly increasing")
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
                raise ShapeError("path samples must be finite")
            segs.append(Segment(t, v))
        if not segs:
            raise ShapeError("a path needs at least one segment")
        dim = segs[0].values.shape[1]
        if any(s.values.shape[1] != dim for s in segs):
            raise ShapeError("segments disagree on state dimension")
        starts = np.array([s.times[0] for s in segs])
        ends = np.array([s.times[-1] for s in segs])
        if starts[0] != 0.0:
            raise ShapeError("first segment must start at time 0")
        for k in range(1, len(segs)):
            if ends[k - 1] != starts[k]:
                raise ShapeError("segments must tile [0, T] without gaps")
        if any(s.times.shape[0] < 2 for s in segs[:-1]):
            raise ShapeError("only the terminal segment may be a single point")
        if abs(ends[-1] - horizon) > _REL_TOL * max(1.0, horizon):
            raise ShapeError("last segment must end at the horizon")
        if jump_times is not None:
            jt = np.atleast_1d(np.asarray(jump_times, dtype=float))
            if jt.shape[0] != len(segs) - 1 or not np.array_equal(jt, starts[1:]):
                raise ShapeError("jump times must coincide with segment starts")
        self.horizon = float(horizon)
        self.dim = dim
        self.segments = tuple(segs)
        self.jump_times = _readonly(starts[1:])
        self._starts = _readonly(starts)
        self._sample_times = None

    def sample_times(self) -> np.ndarray:
        """All sample times, concatenated across segments (with duplicates at jumps)."""
        if self._sample_times is None:
            self._sample_times = _readonly(
                np.concatenate([s.times for s in self.segments])
            )
        return self._sample_times

    def values_at(self, t, side: str = "right") -> np.ndarray:
        """Evaluate the path at times t; side='left' gives left limits at jumps."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if side == "right":
            idx = np.searchsorted(self._starts, t, side="right") - 1
        elif side == "left":
            idx = np.searchsorted(self._starts, t, side="left") - 1
        else:
            raise ParameterError("side must be 'right' or 'left'")
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = np.empty((t.shape[0], self.dim))
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if not mask.any():
                continue
            tq = t[mask]
            for c in range(self.dim):
                out[mask, c] = np.interp(tq, seg.times, seg.values[:, c])
        return out

    def value_at(self, t: float, side: str = "right") -> np.ndarray:
        return self.values_at(np.array([t]), side=side)[0]


def assemble_from_grid(horizon, times, values, jump_times, pre_states, post_states) -> CadlagPath:
    """Build a path from grid samples plus per-jump left/right states.

    `values[j]` is the state at `times[j]` (already post-reset if a jump lands
    exactly on a grid time). Jumps strictly inside a step get the interpolated
    pre state as the closing sample of one segment and the post state opening
    the next.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    jump_times = np.atleast_1d(np.asarray(jump_times, dtype=float))
    pre_states = np.atleast_2d(np.asarray(pre_states, dtype=float))
    post_states = np.atleast_2d(np.asarray(post_states, dtype=float))
    segments = []
    start_t = times[0]
    start_v = values[0]
    for k in range(jump_times.shape[0]):
        tau = jump_times[k]
        inner = (times > start_t) & (times < tau)
        seg_t = np.concatenate([[start_t], times[inner], [tau]])
        seg_v = np.vstack([start_v[None, :], values[inner], pre_states[k][None, :]])
        segments.append((seg_t, seg_v))
        start_t = tau
        start_v = post_states[k]
    inner = times > start_t
    seg_t = np.concatenate([[start_t], times[inner]])
    seg_v = np.vstack([start_v[None, :], values[inner]])
    segments.append((seg_t, seg_v))
    return CadlagPath(horizon, segments, jump_times=jump_times)


@dataclass(frozen=True, eq=False)
class TimeDistortion:
    """Piecewise-linear increasing bijection of [0, T] onto itself."""

    knot_times: np.ndarray
    knot_values: np.ndarray
    horizon: float = field(default=0.0)

    def __post_init__(self):
        kt = np.atleast_1d(np.asarray(self.knot_times, dtype=float))
        kv = np.atleast_1d(np.asarray(self.knot_values, dtype=float))
        if kt.shape != kv.shape or kt.shape[0] < 2:
            raise InvalidDistortionError("need matching knot arrays with >= 2 knots")
        horizon = float(self.horizon) if self.horizon else float(kt[-1])
        tol = _REL_TOL * max(1.0, horizon)
        if abs(kt[0]) > tol or abs(kv[0]) > tol:
            raise InvalidDistortionError("distortion must fix time 0")
        if abs(kt[-1] - horizon) > tol or abs(kv[-1] - horizon) > tol:
            raise InvalidDistortionError("distortion must fix the horizon")
        if not (np.all(np.diff(kt) > 0) and np.all(np.diff(kv) > 0)):
            raise InvalidDistortionError("knot times and images must strictly increase")
        kt = kt.copy()
        kv = kv.copy()
        kt[0] = kv[0] = 0.0
        kt[-1] = kv[-1] = horizon
        object.__setattr__(self, "knot_times", _readonly(kt))
        object.__setattr__(self, "knot_values", _readonly(kv))
        object.__setattr__(self, "horizon", horizon)

    @classmethod
    def identity(cls, horizon: float) -> "TimeDistortion":
        return cls(np.array([0.0, horizon]), np.array([0.0, horizon]), horizon)

    def apply(self, t) -> np.ndarray:
        return np.interp(t, self.knot_times, self.knot_values)

    def inverse(self, s) -> np.ndarray:
        return np.interp(s, self.knot_values, self.knot_times)

    def slopes(self) -> np.ndarray:
        return np.diff(self.knot_values) / np.diff(self.knot_times)

    def is_identity(self) -> bool:
        return bool(np.all(self.slopes() == 1.0))


def distortion_cost(distortion: TimeDistortion) -> float:
    """Max over knot intervals of |log slope|; zero exactly for the identity."""
    return float(np.max(np.abs(np.log(distortion.slopes()))))


def _check_compatible(x1: CadlagPath, x2: CadlagPath) -> None:
    if abs(x1.horizon - x2.horizon) > _REL_TOL * max(1.0, x1.horizon):
        raise ShapeError("paths must share the same horizon")
    if x1.dim != x2.dim:
        raise ShapeError("paths must share the same state dimension")


def skorohod_upper(x1: CadlagPath, x2: CadlagPath, distortion: TimeDistortion) -> float:
    """Distance upper bound max(distortion cost, sup_t |x1(t) - x2(lambda(t))|).

    The sup is exact for these piecewise-linear paths: it is attained at a
    breakpoint of t -> (x1(t), x2(lambda(t))) from one side, and both one-sided
    limits at every breakpoint are inspected.
    """
    _check_compatible(x1, x2)
    if abs(distortion.horizon - x1.horizon) > _REL_TOL * max(1.0, x1.horizon):
        raise ShapeError("distortion horizon must match the paths")
    gamma = distortion_cost(distortion)
    ts = np.unique(
        np.concatenate(
            [
                x1.sample_times(),
                distortion.inverse(x2.sample_times()),
                distortion.knot_times,
            ]
        )
    )
    ts = ts[(ts >= 0.0) & (ts <= x1.horizon)]
    lam_ts = distortion.apply(ts)
    sup = 0.0
    for side in ("right", "left"):
        diff = x1.values_at(ts, side) - x2.values_at(lam_ts, side)
        sup = max(sup, float(np.max(np.sqrt(np.sum(diff * diff, axis=1)))))
    return max(gamma, sup)


def uniform_distance(x1: CadlagPath, x2: CadlagPath) -> float:
    """Sup-norm distance, i.e. the upper bound under the identity distortion."""
    return skorohod_upper(x1, x2, TimeDistortion.identity(x1.horizon))


def build_aligning_distortion(det_times, stoch_times, horizon: float, good: bool) -> TimeDistortion:
    """Distortion sending each deterministic impulse time to its noisy twin.

    Knots are (0,0), (k*alpha, tau_k) for k = 1..N, (T, T). With good=False the
    identity is returned regardless of the impulse times.
    """
    if not good:
        return TimeDistortion.identity(horizon)
    det_times = np.atleast_1d(np.asarray(det_times, dtype=float))
    stoch_times = np.atleast_1d(np.asarray(stoch_times, dtype=float))
    if det_times.shape != stoch_times.shape:
        raise InvalidInputError("need one noisy impulse time per deterministic one")
    n = det_times.shape[0]
    if n == 0:
        return TimeDistortion.identity(horizon)
    alpha = det_times[0]
    if alpha <= 0:
        raise InvalidInputError("deterministic impulse times must be positive")
    expected = alpha * np.arange(1, n + 1)
    if np.max(np.abs(det_times - expected)) > _REL_TOL * alpha * n:
        raise InvalidInputError("deterministic impulse times must be k*alpha")
    if not (n * alpha < horizon < (n + 1) * alpha):
        raise InvalidInputError("horizon must lie strictly between impulse counts")
    if np.any(np.diff(stoch_times) <= 0) or stoch_times[0] <= 0:
        raise InvalidInputError("noisy impulse times must be strictly increasing and positive")
    if stoch_times[-1] >= horizon:
        raise InvalidInputError("last noisy impulse time must precede the horizon")
    if np.max(np.abs(stoch_times - expected)) >= alpha / 4:
        raise InvalidInputError("impulse deviations must stay below alpha/4")
    kt = np.concatenate([[0.0], det_times, [horizon]])
    kv = np.concatenate([[0.0], stoch_times, [horizon]])
    return TimeDistortion(kt, kv, horizon)


def aligning_cost_bound(delta: float, alpha: float, horizon: float) -> float:
    """Bound 4*T*delta/alpha on the cost of an aligning distortion.

    Valid when deviations are at most delta < alpha/(4T) and the final leg
    T - N*alpha is not shorter than max(2*delta, alpha/(2T)).
    """
    return 4.0 * horizon * delta / alpha


def aligning_slope_deviation_bound(delta: float, alpha: float, horizon: float) -> float:
    """Bound on |slope - 1| over an aligning distortion with deviations <= delta.

    Interior slopes deviate by at most 2*delta/alpha, the final leg by at most
    delta/(T - floor(T/alpha)*alpha); the sup over the whole distortion is the
    larger of the two.
    """
    n = int(np.floor(horizon / alpha + 1e-12))
    tail = horizon - n * alpha
    if tail <= 0:
        raise InvalidInputError("horizon must not be a multiple of alpha")
    return max(2.0 * delta / alpha, delta / tail)


def skorohod_oracle(x1: CadlagPath, x2: CadlagPath, resolution: int = 16) -> float:
    """Brute-force minimisation of the distance upper bound on small instances.

    Candidate distortions put knots at the jump times of x1; knot images sweep
    a dyadic grid around the jump times of x2 (so the result is nonincreasing
    in `resolution`). Always at least as large as the true infimum, and the
    identity is always among the candidates.
    """
    _check_compatible(x1, x2)
    if resolution < 8:
        raise ParameterError("resolution must be at least 8")
    if len(x1.jump_times) > 4 or len(x2.jump_times) > 4:
        raise ComplexityGuardError("oracle handles at most 4 jumps per path")
    horizon = x1.horizon
    best = skorohod_upper(x1, x2, TimeDistortion.identity(horizon))
    knots = x1.jump_times
    if knots.shape[0] == 0:
        return best
    targets = x2.jump_times if x2.jump_times.shape[0] else knots
    r_eff = 1 << (int(resolution).bit_length() - 1)
    anchors = np.unique(np.concatenate([[0.0], targets, [horizon]]))
    width = float(np.min(np.diff(anchors))) / 2.0
    offsets = width * np.arange(-r_eff, r_eff + 1) / r_eff
    cands = np.unique(
        np.concatenate([targets[:, None] + offsets[None, :], knots[:, None]], axis=None)
    )
    cands = cands[(cands > _REL_TOL) & (cands < horizon - _REL_TOL)]
    for images in itertools.combinations(cands, knots.shape[0]):
        kt = np.concatenate([[0.0], knots, [horizon]])
        kv = np.concatenate([[0.0], np.asarray(images), [horizon]])
        lam = TimeDistortion(kt, kv, horizon)
        best = min(best, skorohod_upper(x1, x2, lam))
    return best


def write_path_csv(path: CadlagPath, destination) -> None:
    """Emit a path as CSV: jump-time header, then (segment_index, t, values)."""
    with open_dest(destination) as fh:
        header = ",".join(["jump_times"] + [format_float(t) for t in path.jump_times])
        fh.write(header + "\n")
        cols = ",".join(f"value_{c + 1}" for c in range(path.dim))
        fh.write(f"segment_index,t,{cols}\n")
        for k, seg in enumerate(path.segments):
            for j in range(seg.times.shape[0]):
                vals = ",".join(format_float(v) for v in seg.values[j])
                fh.write(f"{k},{format_float(seg.times[j])},{vals}\n")


def read_path_csv(source) -> CadlagPath:
    """Inverse of :func:`write_path_csv`; round-trips samples exactly."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    if len(lines) < 3 or not lines[0].startswith("jump_times"):
        raise DataError("not a path CSV: missing jump_times header")
    head = lines[0].split(",")
    jump_times = np.array([float(x) for x in head[1:]]) if len(head) > 1 else np.empty(0)
    seg_times: list[list[float]] = []
    seg_values: list[list[list[float]]] = []
    for line in lines[2:]:
        if not line:
            continue
        parts = line.split(",")
        k = int(parts[0])
        while k >= len(seg_times):
            seg_times.append([])
            seg_values.append([])
        seg_times[k].append(float(parts[1]))
        seg_values[k].append([float(x) for x in parts[2:]])
    if not seg_times:
        raise DataError("path CSV contains no samples")
    horizon = seg_times[-1][-1]
    segments = [(np.array(t), np.array(v)) for t, v in zip(seg_times, seg_values)]
    return CadlagPath(horizon, segments, jump_times=jump_times if jump_times.size else None)
