"""
Diagnostics of log|p| restricted to circles and of the zero distribution.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from lemnikit.poly import ConstraintTag, LevelSetSpec, RootConfiguration, as_point, log_abs_eval

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
ROOT_GAP = 1e-9


def _circle(center: complex, radius: float, theta: np.ndarray) -> np.ndarray:
    return center + radius * np.exp(1j * theta)


def _require_circle(config: RootConfiguration, what: str) -> None:
    if config.tag is not ConstraintTag.UNIT_CIRCLE:
        raise ValueError(f"{what} needs a UNIT_CIRCLE configuration, got tag {config.tag.value}")


# ---------------------------------------------------------------------------
# Arcs of the lemniscate on the unit circle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcList:
    """Maximal arcs of T inside the lemniscate, as (start, end) angles.

    An arc may wrap through 0, in which case end < start. The whole circle
    is reported as the single arc (0, 2 pi).
    """

    arcs: tuple[tuple[float, float], ...] = ()
    lengths: tuple[float, ...] = ()

    @property
    def total_length(self) -> float:
        return float(sum(self.lengths))

    @property
    def square_sum(self) -> float:
        return arc_square_sum(self)

    def midpoints(self) -> np.ndarray:
        starts = np.array([a for a, _ in self.arcs], dtype=np.float64)
        return np.mod(starts + 0.5 * np.array(self.lengths, dtype=np.float64), TWO_PI)


def arc_square_sum(arcs: ArcList) -> float:
    return float(np.sum(np.square(arcs.lengths)))


def circle_arc_intersections(
    spec: LevelSetSpec,
    angular_samples: int | None = None,
    bisection_tol: float = 1e-12,
) -> ArcList:
    n = spec.degree
    samples = max(64 * n, 512) if angular_samples is None else int(angular_samples)
    if samples < 8 * n:
        raise ValueError(f"angular_samples must be >= 8 * degree = {8 * n}, got {samples}")
    if not bisection_tol > 0:
        raise ValueError(f"bisection_tol must be positive, got {bisection_tol!r}")

    def inside(theta: np.ndarray) -> np.ndarray:
        return log_abs_eval(spec.config, np.exp(1j * theta)) < spec.log_level

    theta = TWO_PI * np.arange(samples) / samples
    state = inside(theta)
    if state.all():
        return ArcList(arcs=((0.0, TWO_PI),), lengths=(TWO_PI,))
    if not state.any():
        return ArcList()

    flips = np.nonzero(state != np.roll(state, -1))[0]
    lo = theta[flips].copy()
    hi = lo + TWO_PI / samples
    lo_state = state[flips]
    while np.max(hi - lo) > bisection_tol:
        mid = 0.5 * (lo + hi)
        same = inside(mid) == lo_state
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    boundary = np.mod(0.5 * (lo + hi), TWO_PI)
    entering = ~lo_state

    # rotate so the list starts with an entry; entries and exits then alternate
    first = int(np.argmax(entering))
    boundary = np.roll(boundary, -first)
    entering = np.roll(entering, -first)
    starts = boundary[entering]
    ends = boundary[~entering]
    lengths = np.mod(ends - starts, TWO_PI)
    return ArcList(
        arcs=tuple(zip(starts.tolist(), ends.tolist(), strict=True)),
        lengths=tuple(lengths.tolist()),
    )


# ---------------------------------------------------------------------------
# Sign changes
# ---------------------------------------------------------------------------

def sign_changes(
    config: RootConfiguration,
    t: float,
    center: complex = 0.0,
    radius: float = 1.0,
    angular_samples: int | None = None,
    *,
    allow_roots_on_circle: bool = False,
    zero_tol: float = 1e-9,
) -> int:
    """Cyclic sign alternations of log|p| - log t around a circle.

    Samples with |h| <= zero_tol are skipped, so h == 0 on the whole circle
    gives 0. A circle passing within 1e-9 of a root raises ValueError unless
    allow_roots_on_circle is set; then h = -inf at the root counts as
    negative, which gives 6 for z^3 - 1 on the unit circle at t = 1.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"level must be positive, got {t!r}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    center = as_point(center)
    n = config.degree
    samples = max(64 * n, 1024) if angular_samples is None else int(angular_samples)
    if samples < 8 * n:
        raise ValueError(f"angular_samples must be >= 8 * degree = {8 * n}, got {samples}")
    if not allow_roots_on_circle:
        gap = float(np.min(np.abs(np.abs(config.locations - center) - radius)))
        if gap <= ROOT_GAP:
            raise ValueError(f"circle |z - {center}| = {radius} passes within {gap:.3g} of a root")

    theta = TWO_PI * np.arange(samples) / samples
    h = log_abs_eval(config, _circle(center, radius, theta)) - math.log(t)
    signs = np.sign(h[np.abs(h) > zero_tol])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs != np.roll(signs, 1)))


# ---------------------------------------------------------------------------
# Doubling exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoublingReport:
    beta: float
    sup_disc: float
    sup_half_disc: float
    sup_positive: float
    refinement_gain: float

    @property
    def beta_star(self) -> float:
        """max(beta, 3); the area of {v < 0} in the disc is at least c / log(beta_star)."""
        return max(self.beta, 3.0)


def _circle_sup(
    values_at: Callable[[np.ndarray], np.ndarray], grid: int, radius: float
) -> tuple[float, float]:
    """sup |v| on the circle of given radius: grid argmax, then bounded refinement."""
    theta = TWO_PI * np.arange(grid) / grid
    vals = np.abs(values_at(radius * np.exp(1j * theta)))
    k = int(np.argmax(vals))
    coarse = float(vals[k])
    step = TWO_PI / grid
    res = minimize_scalar(
        lambda th: -abs(float(values_at(radius * np.exp(1j * th)))),
        bounds=(theta[k] - step, theta[k] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(coarse, -float(res.fun)), max(-float(res.fun) - coarse, 0.0)


def doubling_exponent(
    config: RootConfiguration, shrink: float = 0.98, grid: int = 1024
) -> DoublingReport:
    """beta = log(sup_D |v| / sup_{D/2} |v|) with v(z) = log|p(shrink z)|.

    All roots sit on |z| = 1/shrink > 1, so v is harmonic on the closed disc
    and both suprema are attained on the circles |z| = 1 and |z| = 1/2.
    """
    _require_circle(config, "doubling exponent")
    if not 0.0 < shrink < 1.0:
        raise ValueError(f"shrink must lie in (0, 1), got {shrink!r}")
    if grid < 16:
        raise ValueError(f"grid must be >= 16, got {grid}")

    def v(z):
        return log_abs_eval(config, shrink * np.asarray(z))

    sup_disc, gain = _circle_sup(v, grid, 1.0)
    sup_half, gain_half = _circle_sup(v, grid, 0.5)
    theta = TWO_PI * np.arange(grid) / grid
    sup_positive = max(float(np.max(v(np.exp(1j * theta)))), 0.0)
    if sup_half == 0.0:
        logger.warning("v vanishes on |z| = 1/2; doubling exponent is infinite")
        beta = math.inf
    else:
        beta = math.log(sup_disc / sup_half)
    return DoublingReport(
        beta=beta,
        sup_disc=sup_disc,
        sup_half_disc=sup_half,
        sup_positive=sup_positive,
        refinement_gain=max(gain, gain_half),
    )


# ---------------------------------------------------------------------------
# Equidistribution
# ---------------------------------------------------------------------------

def discrepancy(config: RootConfiguration) -> float:
    """sup over arcs of |fraction of zeros in the arc - normalized arc length|."""
    _require_circle(config, "discrepancy")
    x = config.angles() / TWO_PI
    n = x.size
    gaps = np.arange(1, n + 1) / n - x
    return float(1.0 / n + gaps.max() - gaps.min())


def erdos_turan_bound(config: RootConfiguration, K: int | None = None) -> float:
    """Fourier upper bound on discrepancy using harmonics 1..K (default K = n)."""
    _require_circle(config, "Erdos-Turan bound")
    theta = config.angles()
    n = theta.size
    K = n if K is None else int(K)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    h = np.arange(1, K + 1, dtype=np.float64)
    moments = np.abs(np.exp(1j * np.outer(h, theta)).mean(axis=1))
    return float(6.0 / (K + 1) + (4.0 / math.pi) * np.sum((1.0 / h - 1.0 / (K + 1)) * moments))
