"""Effector-dependent layer: plan points to sampled pen kinematics.

Each pen-down step of a trajectory plan becomes one lognormal speed pulse.
Pulse onsets accumulate a per-stroke delay of ``K_t + noise + K_alpha *
delay_factor(angle)``, so sharp turns separate pulses (distinct strokes)
while gentle turns let them overlap into fluent movement.  Summing the
pulse velocity components and integrating yields the pen trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateSegmentError
from .evolution import EvolutionConfig, evolve_plan
from .lognormal import LognormalStroke, delay_factor, lognormal_speed
from .plan import (
    GuideLines,
    HexGrid,
    GlyphPlan,
    TrajectoryPlan,
    build_word_plan,
    builtin_library,
)

DEFAULT_DT = 0.005  # 200 Hz sampling
TAIL_RELATIVE_CUTOFF = 1e-6
DEFAULT_PEN_UP_GAP = 0.05  # seconds between pen-down segments

_COINCIDENT = 1e-12


@dataclass(frozen=True)
class WriterProfile:
    """Writer-dependent kinematic constants.

    Attributes:
        K_sigma: Pulse-width offset in [0, 0.04]; 0 gives a beginner's
            narrow pulses, 0.04 an adult's broad overlapping ones.
        K_t: Base inter-onset delay (s).
        K_alpha: Maximum angle-dependent delay (s), reached at a reversal.
        K_D: Amplitude scale; None means "use the grid spacing", which
            makes pulse areas equal plan-point distances.
        eps_t: Std dev of onset timing noise (s).
        eps_D: Std dev of amplitude noise as a fraction of the grid spacing.
        mu: Log-time location parameter, fixed at 0.
        rng_seed: Seed for the per-synthesis noise stream.
    """

    K_sigma: float = 0.04
    K_t: float = 0.04
    K_alpha: float = 0.2
    K_D: float | None = None
    eps_t: float = 0.0
    eps_D: float = 0.0
    mu: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.K_sigma <= 0.04):
            raise ValueError(f"K_sigma must be in [0, 0.04], got {self.K_sigma}")
        if self.K_t <= 0.0:
            raise ValueError(f"K_t must be > 0, got {self.K_t}")
        if self.K_alpha < 0.0:
            raise ValueError(f"K_alpha must be >= 0, got {self.K_alpha}")
        if self.K_D is not None and self.K_D <= 0.0:
            raise ValueError(f"K_D must be > 0, got {self.K_D}")
        if self.eps_t < 0.0 or self.eps_D < 0.0:
            raise ValueError("noise levels must be >= 0")

    @property
    def sigma(self) -> float:
        """Pulse log-time scale: 0.01 + K_sigma."""
        return 0.01 + self.K_sigma


@dataclass(frozen=True)
class SampledTrajectory:
    """Uniformly sampled pen state.

    All arrays share one length; ``t`` is ``arange(n) * dt``.  ``speed``
    always equals ``hypot(vx, vy)``.
    """

    dt: float
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    speed: np.ndarray
    pen_down: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.t)
        for name in ("x", "y", "vx", "vy", "speed", "pen_down"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"field {name} length differs from t")

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1]) if self.n_samples else 0.0

    def pen_down_runs(self) -> list[tuple[int, int]]:
        """Maximal [start, stop) ranges of consecutive pen-down samples."""
        runs = []
        start = None
        for i, down in enumerate(self.pen_down):
            if down and start is None:
                start = i
            elif not down and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, self.n_samples))
        return runs


def _empty_trajectory(dt: float) -> SampledTrajectory:
    z = np.zeros(0)
    return SampledTrajectory(dt, z, z.copy(), z.copy(), z.copy(), z.copy(),
                             z.copy(), np.zeros(0, dtype=bool))


def interior_angle(
    prev: tuple[float, float],
    vertex: tuple[float, float],
    next_: tuple[float, float],
) -> float:
    """Vertex angle in degrees between the rays vertex->prev and vertex->next.

    A straight continuation gives 180, a full reversal 0.
    """
    a = np.asarray(prev, dtype=float) - np.asarray(vertex, dtype=float)
    b = np.asarray(next_, dtype=float) - np.asarray(vertex, dtype=float)
    na, nb = np.hypot(*a), np.hypot(*b)
    if na < _COINCIDENT or nb < _COINCIDENT:
        raise DegenerateSegmentError("zero-length ray at plan vertex")
    cos_angle = np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0)
    return float(np.degrees(np.arccos(cos_angle)))


@dataclass(frozen=True)
class StrokeSegment:
    """Strokes of one pen-down run, with the run's starting point."""

    start: tuple[float, float]
    strokes: tuple[LognormalStroke, ...]


@dataclass(frozen=True)
class ParameterAssignment:
    """Result of parameter assignment over a whole plan."""

    segments: tuple[StrokeSegment, ...]
    n_dropped: int

    @property
    def strokes(self) -> tuple[LognormalStroke, ...]:
        return tuple(s for seg in self.segments for s in seg.strokes)


def _vertex_angle(points: np.ndarray, j: int) -> float:
    """Turn angle at points[j] between the incoming and outgoing steps.

    Looks back past coincident points for the incoming ray; with no usable
    predecessor (movement onset) the turn is defined as 180 degrees, the
    minimum-delay case.
    """
    vertex = points[j]
    nxt = points[j + 1]
    for k in range(j - 1, -1, -1):
        if np.hypot(*(points[k] - vertex)) > _COINCIDENT:
            if np.hypot(*(nxt - vertex)) <= _COINCIDENT:
                return 180.0
            return interior_angle(tuple(points[k]), tuple(vertex), tuple(nxt))
    return 180.0


def assign_parameters(
    plan: TrajectoryPlan,
    profile: WriterProfile,
    d_ref: float,
    rng: np.random.Generator | None = None,
) -> ParameterAssignment:
    """Turn each pen-down step of ``plan`` into a lognormal stroke.

    Onset clocks restart at each pen-down run.  Noise draws come from ``rng``
    (or a fresh generator seeded with ``profile.rng_seed``) in a fixed
    order: per stroke, the timing draw precedes the amplitude draw.
    Zero-length steps and steps whose noisy amplitude is not positive are
    dropped and counted in ``n_dropped``.
    """
    if d_ref <= 0.0:
        raise ValueError(f"d_ref must be > 0, got {d_ref}")
    if rng is None:
        rng = np.random.default_rng(profile.rng_seed)
    K_D = profile.K_D if profile.K_D is not None else d_ref
    sigma = profile.sigma

    segments: list[StrokeSegment] = []
    n_dropped = 0
    for lo, hi in plan.pen_down_runs():
        pts = plan.points[lo:hi]
        strokes: list[LognormalStroke] = []
        t_acc = 0.0
        for j in range(len(pts) - 1):
            delta = rng.normal(0.0, profile.eps_t)
            d_noise = rng.normal(0.0, profile.eps_D * d_ref)
            alpha = _vertex_angle(pts, j)
            t_acc += profile.K_t + delta + profile.K_alpha * delay_factor(alpha)
            dq = pts[j + 1] - pts[j]
            d_act = float(np.hypot(*dq))
            if d_act <= _COINCIDENT:
                n_dropped += 1
                continue
            D = K_D * (d_act + d_noise) / d_ref
            if D <= 0.0:
                n_dropped += 1
                continue
            strokes.append(
                LognormalStroke(
                    t0=max(0.0, t_acc),
                    mu=profile.mu,
                    sigma=sigma,
                    D=D,
                    phi=float(np.arctan2(abs(dq[1]), abs(dq[0]))),
                    sgn_x=1 if dq[0] >= 0.0 else -1,
                    sgn_y=1 if dq[1] >= 0.0 else -1,
                )
            )
        segments.append(StrokeSegment(start=tuple(pts[0]), strokes=tuple(strokes)))
    return ParameterAssignment(segments=tuple(segments), n_dropped=n_dropped)


def _grid_end_time(strokes: tuple[LognormalStroke, ...] | list[LognormalStroke]) -> float:
    """Time by which every pulse has fallen below 1e-6 of the largest
    amplitude (and past the last onset).
    """
    max_D = max(s.D for s in strokes)
    thr = TAIL_RELATIVE_CUTOFF * max_D
    t_end = 0.0
    for s in strokes:
        peak = s.peak_speed
        if peak <= thr or s.D == 0.0:
            end = s.t0
        else:
            u = -s.sigma + math.sqrt(2.0 * math.log(peak / thr))
            end = s.t0 + math.exp(s.mu + s.sigma * u)
        t_end = max(t_end, end, s.t0)
    return t_end


def synthesize_velocity(
    strokes: tuple[LognormalStroke, ...] | list[LognormalStroke],
    dt: float = DEFAULT_DT,
    t_end: float | None = None,
) -> SampledTrajectory:
    """Superpose stroke pulses into sampled velocity components.

    The grid runs from 0 to the time every pulse has decayed below 1e-6 of
    the largest amplitude (``t_end`` overrides, for aligned comparisons).
    Positions are left at zero; see ``integrate_trajectory``.
    """
    if not strokes:
        raise ValueError("strokes must be non-empty")
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if t_end is None:
        t_end = _grid_end_time(strokes)
    n = int(math.ceil(t_end / dt)) + 1
    t = np.arange(n) * dt
    vx = np.zeros(n)
    vy = np.zeros(n)
    for s in strokes:
        mag = lognormal_speed(s, t)
        vx += s.sgn_x * mag * math.cos(s.phi)
        vy += s.sgn_y * mag * math.sin(s.phi)
    return SampledTrajectory(
        dt=dt,
        t=t,
        x=np.zeros(n),
        y=np.zeros(n),
        vx=vx,
        vy=vy,
        speed=np.hypot(vx, vy),
        pen_down=np.ones(n, dtype=bool),
    )


def integrate_trajectory(
    vel: SampledTrajectory, start: tuple[float, float]
) -> SampledTrajectory:
    """Cumulative trapezoidal integration of the velocity fields from ``start``."""
    x = start[0] + _cumtrapz(vel.vx, vel.dt)
    y = start[1] + _cumtrapz(vel.vy, vel.dt)
    return replace(vel, x=x, y=y)


def _cumtrapz(v: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(v)
    if len(v) > 1:
        out[1:] = np.cumsum((v[1:] + v[:-1]) * (dt / 2.0))
    return out


def _concat_segments(
    pieces: list[SampledTrajectory],
    dt: float,
    pen_up_gap: float,
) -> SampledTrajectory:
    """Chain per-segment trajectories on one uniform clock.

    Between segments the pen lifts for ``pen_up_gap`` seconds; gap samples
    glide linearly to the next segment's start with zero model velocity.
    """
    if not pieces:
        return _empty_trajectory(dt)
    n_gap = max(1, int(round(pen_up_gap / dt))) if pen_up_gap > 0 else 0
    xs, ys, vxs, vys, pens = [], [], [], [], []
    for k, piece in enumerate(pieces):
        if k > 0 and n_gap:
            x_prev, y_prev = xs[-1][-1], ys[-1][-1]
            x_next, y_next = piece.x[0], piece.y[0]
            frac = np.arange(1, n_gap + 1) / (n_gap + 1)
            xs.append(x_prev + (x_next - x_prev) * frac)
            ys.append(y_prev + (y_next - y_prev) * frac)
            vxs.append(np.zeros(n_gap))
            vys.append(np.zeros(n_gap))
            pens.append(np.zeros(n_gap, dtype=bool))
        xs.append(piece.x)
        ys.append(piece.y)
        vxs.append(piece.vx)
        vys.append(piece.vy)
        pens.append(piece.pen_down)
    x = np.concatenate(xs)
    vx = np.concatenate(vxs)
    vy = np.concatenate(vys)
    n = len(x)
    return SampledTrajectory(
        dt=dt,
        t=np.arange(n) * dt,
        x=x,
        y=np.concatenate(ys),
        vx=vx,
        vy=vy,
        speed=np.hypot(vx, vy),
        pen_down=np.concatenate(pens),
    )


def _point_sample(point: tuple[float, float], dt: float) -> SampledTrajectory:
    """One stationary pen-down sample (a strokeless segment leaves a dot)."""
    one = np.zeros(1)
    return SampledTrajectory(
        dt=dt,
        t=one.copy(),
        x=np.full(1, point[0]),
        y=np.full(1, point[1]),
        vx=one.copy(),
        vy=one.copy(),
        speed=one.copy(),
        pen_down=np.ones(1, dtype=bool),
    )


def synthesize_plan(
    plan: TrajectoryPlan,
    profile: WriterProfile,
    d_ref: float,
    dt: float = DEFAULT_DT,
    pen_up_gap: float = DEFAULT_PEN_UP_GAP,
) -> SampledTrajectory:
    """Run the effector-dependent pipeline over an (already evolved) plan."""
    assignment = assign_parameters(plan, profile, d_ref)
    pieces = []
    for seg in assignment.segments:
        if seg.strokes:
            vel = synthesize_velocity(seg.strokes, dt)
            pieces.append(integrate_trajectory(vel, seg.start))
        else:
            pieces.append(_point_sample(seg.start, dt))
    return _concat_segments(pieces, dt, pen_up_gap)


def synthesize_word(
    word: str,
    profile: WriterProfile,
    cfg: EvolutionConfig,
    grid: HexGrid | None = None,
    glyphs: dict[str, GlyphPlan] | None = None,
    dt: float = DEFAULT_DT,
    letter_advance: float | None = None,
    guides: GuideLines | None = None,
    pen_up_gap: float = DEFAULT_PEN_UP_GAP,
) -> SampledTrajectory:
    """Full pipeline: word plan, maturity evolution, stroke kinematics.

    Deterministic given ``cfg.rng_seed`` (point selection) and
    ``profile.rng_seed`` (kinematic noise).
    """
    if glyphs is None or grid is None:
        lib_glyphs, lib_grid = builtin_library()
        glyphs = glyphs if glyphs is not None else lib_glyphs
        grid = grid if grid is not None else lib_grid
    plan = build_word_plan(word, glyphs, grid, letter_advance, guides)
    evolved = evolve_plan(plan, cfg)
    return synthesize_plan(evolved, profile, d_ref=grid.pitch, dt=dt,
                           pen_up_gap=pen_up_gap)
