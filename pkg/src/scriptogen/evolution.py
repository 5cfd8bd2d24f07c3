"""Temporal evolution: keep a maturity-dependent subset of plan points.

A writer of retention level ``E`` (percent) keeps ``L = round(n_sl * E/100)``
of the ``n_sl`` plan points: one of the first two points, the last point,
and one point drawn from each of ``L - 2`` near-equal runs of the interior.
Draws are rejected until every glyph that had a guide-line point keeps at
least one, so the word stays legible however few points survive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleMaturityError, LegibilityError
from .plan import TrajectoryPlan

# Linear noise schedule endpoints: (E, eps_D, eps_t) at both ends.
_NOISE_E_LO, _NOISE_E_HI = 20.0, 100.0
_EPS_D_MAX = 0.3
_EPS_T_MAX = 0.02

MIN_POINTS = 5


@dataclass(frozen=True)
class EvolutionConfig:
    """Settings for one evolution pass.

    ``E`` must be at least ``500 / n_sl`` for the plan it is applied to,
    so that at least MIN_POINTS points survive.
    """

    E: float
    rng_seed: int = 0
    max_legibility_retries: int = 1000

    def __post_init__(self) -> None:
        if not (0.0 < self.E <= 100.0):
            raise InfeasibleMaturityError(f"E must be in (0, 100], got {self.E}")
        if self.max_legibility_retries < 1:
            raise ValueError("max_legibility_retries must be >= 1")


def target_count(n_sl: int, E: float) -> int:
    """Number of points to keep: round(n_sl * E / 100), clamped to [5, n_sl]."""
    if n_sl < MIN_POINTS:
        raise InfeasibleMaturityError(
            f"plan has {n_sl} points; need at least {MIN_POINTS}"
        )
    if E < 500.0 / n_sl:
        raise InfeasibleMaturityError(
            f"E={E} below feasibility bound 500/n_sl={500.0 / n_sl:.3f}"
        )
    L = int(np.floor(n_sl * E / 100.0 + 0.5))  # ties round up
    return max(MIN_POINTS, min(L, n_sl))


def scale_noise(E: float) -> tuple[float, float]:
    """(eps_D, eps_t) decreasing linearly from (0.3, 0.02) at E=100
    to (0, 0) at E=20; clamped outside [20, 100].
    """
    frac = (min(max(E, _NOISE_E_LO), _NOISE_E_HI) - _NOISE_E_LO) / (
        _NOISE_E_HI - _NOISE_E_LO
    )
    return (_EPS_D_MAX * frac, _EPS_T_MAX * frac)


def scale_k_sigma(E: float) -> float:
    """Pulse-width constant for retention level ``E``.

    Interpolates linearly between the measured endpoints: beginners write
    short strokes with narrow pulses (K_sigma = 0 at E = 100), skilled
    writers broad overlapping ones (K_sigma = 0.04 at E = 20).
    """
    frac = (min(max(E, _NOISE_E_LO), _NOISE_E_HI) - _NOISE_E_LO) / (
        _NOISE_E_HI - _NOISE_E_LO
    )
    return 0.04 * (1.0 - frac)


def _cluster_bounds(n_interior: int, n_clusters: int) -> list[tuple[int, int]]:
    """Split ``n_interior`` consecutive slots into ``n_clusters`` runs whose
    sizes differ by at most one; the remainder goes to the earliest runs.
    """
    base, rem = divmod(n_interior, n_clusters)
    bounds = []
    start = 0
    for k in range(n_clusters):
        size = base + (1 if k < rem else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _glyphs_needing_tags(plan: TrajectoryPlan) -> dict[int, set[int]]:
    """For each glyph that has tagged points, the set of their indices."""
    need: dict[int, set[int]] = {}
    for i, tag in enumerate(plan.tags):
        if tag is not None:
            need.setdefault(plan.glyph_ids[i], set()).add(i)
    return need


def evolve_plan(plan: TrajectoryPlan, cfg: EvolutionConfig) -> TrajectoryPlan:
    """Select the maturity-dependent subsequence of ``plan``.

    Returns a plan of exactly ``target_count(plan.n_sl, cfg.E)`` points in
    the original order.  Fully deterministic for a given ``cfg.rng_seed``.

    Raises:
        InfeasibleMaturityError: E below the feasibility bound.
        LegibilityError: no draw kept a guide-line point for some glyph
            within ``cfg.max_legibility_retries`` attempts.
    """
    n = plan.n_sl
    L = target_count(n, cfg.E)
    rng = np.random.default_rng(cfg.rng_seed)

    if L >= n:
        # Full retention: the start-choice rule cannot drop a point without
        # breaking the requested count, so the plan passes through unchanged.
        return plan

    start = int(rng.integers(2))  # index 0 or 1
    end = n - 1
    n_interior = n - 3  # points 2 .. n-2
    bounds = _cluster_bounds(n_interior, L - 2)
    need = _glyphs_needing_tags(plan)

    chosen: list[int] = []
    for _ in range(cfg.max_legibility_retries):
        chosen = [start]
        for lo, hi in bounds:
            chosen.append(2 + lo + int(rng.integers(hi - lo)))
        chosen.append(end)
        selected = set(chosen)
        bad = [g for g, idxs in need.items() if not (idxs & selected)]
        if not bad:
            break
    else:
        letters = ", ".join(
            repr(plan.glyph_letter(g)) for g, idxs in sorted(need.items())
            if not (idxs & set(chosen))
        )
        raise LegibilityError(
            f"could not keep a guide-line point for glyph(s) {letters} "
            f"after {cfg.max_legibility_retries} retries"
        )

    idx = np.array(chosen)
    return TrajectoryPlan(
        points=plan.points[idx],
        pen_down=_subsequence_pen_flags(plan.pen_down, chosen),
        tags=tuple(plan.tags[i] for i in chosen),
        glyph_ids=tuple(plan.glyph_ids[i] for i in chosen),
        letters=plan.letters,
    )


def _subsequence_pen_flags(
    pen_down: tuple[bool, ...], chosen: list[int]
) -> tuple[bool, ...]:
    """A selected pair stays pen-down only if every original step between
    the two indices was pen-down (a dropped pen-up gap must not fuse glyphs).
    """
    flags = []
    for a, b in zip(chosen, chosen[1:]):
        flags.append(all(pen_down[a:b]))
    return tuple(flags)
