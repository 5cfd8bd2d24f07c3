"""Scaled lognormal speed pulses and the angle-dependent delay law.

A single ballistic pen stroke is modelled as a lognormal speed pulse

    speed(t) = D / (sigma * sqrt(2*pi) * (t - t0))
               * exp(-(ln(t - t0) - mu)^2 / (2 * sigma^2))      for t > t0

which integrates to exactly ``D`` over (t0, inf) and peaks at
``t0 + exp(mu - sigma^2)``.  The delay between consecutive pulses shrinks
with the turn angle at the shared plan point; that relation is captured by
a fitted sigmoid with slope 0.06 1/deg centred at 65 deg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

# Below this value the pulse is numerically indistinguishable from zero.
_SPEED_FLOOR = 1e-300

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Fitted delay-law constants: slope (1/deg) and centre (deg).
DELAY_SLOPE = 0.06
DELAY_CENTER = 65.0


@dataclass(frozen=True)
class LognormalStroke:
    """Parameters of one stroke's speed pulse.

    Attributes:
        t0: Onset time (s).  The pulse is identically zero for t <= t0.
        mu: Log-time location parameter.
        sigma: Log-time scale parameter, > 0.
        D: Commanded displacement; equals the area under the pulse.
        phi: Direction angle in [0, pi/2] (radians), from the folded
            arctangent of the displacement slope.
        sgn_x: Sign (+1/-1) of the x displacement.
        sgn_y: Sign (+1/-1) of the y displacement.
    """

    t0: float
    mu: float
    sigma: float
    D: float
    phi: float = 0.0
    sgn_x: int = 1
    sgn_y: int = 1

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0):
            raise ParameterDomainError(f"sigma must be > 0, got {self.sigma}")
        if self.D < 0.0:
            raise ParameterDomainError(f"D must be >= 0, got {self.D}")
        if self.t0 < 0.0:
            raise ParameterDomainError(f"t0 must be >= 0, got {self.t0}")

    @property
    def peak_time(self) -> float:
        """Time of maximum speed: t0 + exp(mu - sigma^2)."""
        return self.t0 + math.exp(self.mu - self.sigma**2)

    @property
    def peak_speed(self) -> float:
        """Maximum of the pulse, D * exp(sigma^2/2 - mu) / (sigma*sqrt(2*pi))."""
        if self.D == 0.0:
            return 0.0
        return (
            self.D
            * math.exp(0.5 * self.sigma**2 - self.mu)
            / (self.sigma * math.sqrt(2.0 * math.pi))
        )

    def support_end(self, rel_threshold: float = 1e-6) -> float:
        """Earliest time after the peak where speed stays below
        ``rel_threshold * peak_speed`` forever.
        """
        if self.D == 0.0:
            return self.t0
        # speed(u)/peak = exp(-(u + sigma)^2 / 2) with u = (ln tau - mu)/sigma
        u = -self.sigma + math.sqrt(2.0 * math.log(1.0 / rel_threshold))
        return self.t0 + math.exp(self.mu + self.sigma * u)


def lognormal_speed(stroke: LognormalStroke, t):
    """Evaluate the stroke's speed pulse at time(s) ``t``.

    Accepts a scalar or array of times; returns the matching shape.
    Evaluation runs in log space so that the 1/(t - t0) factor cannot
    overflow near onset; results below 1e-300 are clamped to zero.
    """
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    if stroke.D > 0.0:
        tau = t_arr - stroke.t0
        mask = tau > 0.0
        if np.any(mask):
            log_tau = np.log(tau[mask])
            log_val = (
                math.log(stroke.D)
                - math.log(stroke.sigma)
                - _LOG_SQRT_2PI
                - log_tau
                - (log_tau - stroke.mu) ** 2 / (2.0 * stroke.sigma**2)
            )
            val = np.exp(log_val)
            val[val < _SPEED_FLOOR] = 0.0
            out[mask] = val
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out)
    return out


def sigmoid(alpha: float, b: float, c: float) -> float:
    """Logistic curve 1 / (1 + exp(-b * (alpha - c))), with ``alpha`` in degrees."""
    z = -b * (alpha - c)
    # Split on sign so exp never overflows.
    if z >= 0.0:
        ez = math.exp(-z)
        return ez / (1.0 + ez)
    return 1.0 / (1.0 + math.exp(z))


def delay_factor(alpha: float) -> float:
    """Fraction of the maximum inter-stroke delay added at a turn of
    ``alpha`` degrees.

    Strictly decreasing on [0, 180]: a straight continuation (180 deg)
    adds almost no delay, a full reversal (0 deg) adds almost the maximum.
    Equals 0.5 at the 65-degree centre.
    """
    if not (0.0 <= alpha <= 180.0):
        raise ParameterDomainError(
            f"interior angle must be in [0, 180] degrees, got {alpha}"
        )
    return sigmoid(-alpha, DELAY_SLOPE, -DELAY_CENTER)
