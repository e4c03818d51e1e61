"""
Constructions: zero-pushing, the small-area circle polynomial built from an
entire generator, and the named configuration families.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from scipy.special import gammaln

from lemnikit.poly import (
    CIRCLE_TOL,
    ConstraintTag,
    RootConfiguration,
    compose_with_generator,
    unit_point,
)
from lemnikit.potential import (
    AtomPlacement,
    CircleMeasure,
    DiscreteCircleMeasure,
    equal_mass_partition,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------
#
# A generator is described by log g_j, the logs of the Taylor coefficients of
# log(E(R + w) / E(R)) = sum_j g_j w^j, together with the closed form of
# E(R + w) / E(R) used for the boundedness check.

@dataclass(frozen=True)
class Generator:
    name: str
    log_coeffs: Callable[[float, np.ndarray], np.ndarray]
    ratio: Callable[[float, np.ndarray], np.ndarray]


def _exp_exp_log_coeffs(R: float, j: np.ndarray) -> np.ndarray:
    # log E(R + w) - log E(R) = e^R (e^w - 1)
    return R - gammaln(j + 1.0)


def _exp_exp_ratio(R: float, w: np.ndarray) -> np.ndarray:
    return np.exp(math.exp(R) * np.expm1(w))


def _exp_log_coeffs(R: float, j: np.ndarray) -> np.ndarray:
    return np.where(j == 1, 0.0, -np.inf)


def _exp_ratio(R: float, w: np.ndarray) -> np.ndarray:
    return np.exp(w)


GENERATORS: dict[str, Generator] = {
    "exp-exp": Generator("exp-exp", _exp_exp_log_coeffs, _exp_exp_ratio),
    "exp": Generator("exp", _exp_log_coeffs, _exp_ratio),
}


# ---------------------------------------------------------------------------
# Wagner series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WagnerParams:
    R: float
    truncation_tolerance: float = 1e-12
    alpha: float = 1.0
    degree_cap: int = 1_000_000
    max_terms: int = 4096
    generator: str = "exp-exp"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.R) and self.R > 1.0):
            raise ValueError(f"R must be a finite number > 1, got {self.R!r}")
        if not 0.0 < self.truncation_tolerance < 1.0:
            raise ValueError(f"truncation_tolerance must lie in (0, 1), got {self.truncation_tolerance!r}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if self.degree_cap < 1:
            raise ValueError(f"degree_cap must be >= 1, got {self.degree_cap}")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {sorted(GENERATORS)}")


@dataclass(frozen=True, eq=False)
class WagnerSeries:
    """Normalized coefficients b_k = a_k(R) / E(R) for k = 0..N.

    `weighted` holds w_k = b_k (R/2)^k; `tail_bound` bounds sum_{k>N} w_k.
    """

    R: float
    b: np.ndarray
    weighted: np.ndarray
    tail_bound: float

    @property
    def N(self) -> int:
        return int(self.b.size - 1)

    @property
    def a_ratio(self) -> float:
        """A_{R,N} / E(R) = 4 sum_{k=1..N} k w_k."""
        k = np.arange(1, self.N + 1)
        return float(4.0 * np.sum(k * self.weighted[1:]))

    @property
    def M(self) -> int:
        return math.ceil(16.0 * self.R * self.a_ratio)

    def fourier_coeffs(self) -> np.ndarray:
        k = np.arange(1, self.N + 1)
        return k * self.weighted[1:] / self.a_ratio


def wagner_coefficients(params: WagnerParams) -> WagnerSeries:
    """b_k from k b_k = sum_{j=1..k} j g_j b_{k-j}, the recurrence for exp of a series.

    The recurrence runs on w_k = b_k (R/2)^k directly so that both factors
    never need to be formed separately. Terms are generated until they are
    past their peak and decay at least geometrically with ratio 1/2; N is
    then the smallest index whose tail stays below the tolerance.
    """
    gen = GENERATORS[params.generator]
    half = params.R / 2.0
    tol = params.truncation_tolerance
    j_all = np.arange(1, params.max_terms + 1, dtype=np.float64)
    with np.errstate(over="ignore"):
        # j g_j (R/2)^j, formed in logs
        g_weighted = np.exp(np.log(j_all) + gen.log_coeffs(params.R, j_all) + j_all * math.log(half))

    w = [1.0]
    peak = 0
    for k in range(1, params.max_terms + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            value = float(np.dot(g_weighted[:k], w[::-1]) / k)
        if not math.isfinite(value):
            raise OverflowError(f"coefficient b_{k} overflows for R = {params.R}")
        w.append(value)
        if value > w[peak]:
            peak = k
        if k > peak and value < tol * 1e-3 and value <= 0.5 * w[k - 1]:
            break
    else:
        raise ValueError(
            f"series for R = {params.R} did not converge within {params.max_terms} terms"
        )

    weighted = np.array(w, dtype=np.float64)
    K = weighted.size - 1
    # geometric decay past K bounds the remaining mass by w_K
    suffix = np.cumsum(weighted[::-1])[::-1]
    tails = np.append(suffix[1:], 0.0) + weighted[K]
    N = max(int(np.argmax(tails <= tol)), 1)
    with np.errstate(divide="ignore", over="ignore"):
        b = weighted[: N + 1] / half ** np.arange(N + 1)
    return WagnerSeries(R=params.R, b=b, weighted=weighted[: N + 1], tail_bound=float(tails[N]))


STRIP_RATIO = 0.5


@dataclass(frozen=True)
class BoundednessCheck:
    max_modulus: float
    series_bound: float
    truncation_error: float
    strip_max: float
    strip_ok: bool
    ok: bool


def strip_points(R: float, samples: int = 64) -> np.ndarray:
    """Grid of offsets w with |w| <= R and pi/2 <= |Im w| <= 3 pi/2.

    Empty when R < pi/2.
    """
    x = np.linspace(-R, R, samples)
    y = np.linspace(0.5 * math.pi, 1.5 * math.pi, samples)
    w = np.add.outer(x, 1j * y).ravel()
    w = w[np.abs(w) <= R]
    return np.concatenate([w, np.conj(w)])


def generator_boundedness(
    params: WagnerParams, series: WagnerSeries | None = None, samples: int = 512
) -> BoundednessCheck:
    """Check |E(R + w)| / E(R) against the series on |w| = R/2, and on the strip.

    The truncated series must agree with the closed form up to the
    truncation tolerance, and the modulus must stay below sum_k w_k. On the
    strip offsets of `strip_points` the ratio must stay at most 1/2; the
    worst value found is reported as strip_max (0 when the strip misses the
    disc |w| <= R).
    """
    series = wagner_coefficients(params) if series is None else series
    gen = GENERATORS[params.generator]
    w = 0.5 * params.R * np.exp(2j * np.pi * np.arange(samples) / samples)
    strip = strip_points(params.R)
    with np.errstate(over="ignore", invalid="ignore"):
        exact = gen.ratio(params.R, w)
        on_strip = np.abs(gen.ratio(params.R, strip))
    truncated = np.polynomial.polynomial.polyval(w, series.b)
    bound = float(series.weighted.sum())
    max_modulus = float(np.max(np.abs(exact)))
    error = float(np.max(np.abs(exact - truncated)))
    strip_max = float(np.max(on_strip)) if on_strip.size else 0.0
    strip_ok = bool(math.isfinite(strip_max) and strip_max <= STRIP_RATIO)
    ok = bool(
        strip_ok
        and math.isfinite(max_modulus)
        and max_modulus <= bound * (1 + 1e-9) + series.tail_bound
        and error <= series.tail_bound + params.truncation_tolerance + 1e-12 * bound
    )
    if not ok:
        logger.warning(
            "Generator %s fails the boundedness check at R=%s (max %.6g, bound %.6g, error %.3g, strip %.3g)",
            params.generator, params.R, max_modulus, bound, error, strip_max,
        )
    return BoundednessCheck(
        max_modulus=max_modulus,
        series_bound=bound,
        truncation_error=error,
        strip_max=strip_max,
        strip_ok=strip_ok,
        ok=ok,
    )


@dataclass(frozen=True, eq=False)
class WagnerResult:
    config: RootConfiguration
    level: float
    M: int
    measure: CircleMeasure
    atoms: DiscreteCircleMeasure
    series: WagnerSeries
    boundedness: BoundednessCheck

    def to_json(self) -> dict[str, Any]:
        return {
            "R": self.series.R,
            "N": self.series.N,
            "M": self.M,
            "a_ratio": self.series.a_ratio,
            "tail_bound": self.series.tail_bound,
            "level": self.level,
            "boundedness_ok": self.boundedness.ok,
            "strip_max": self.boundedness.strip_max,
            "measure": self.measure.to_json(),
            "config": self.atoms.to_json(),
        }


def wagner_polynomial(
    params: WagnerParams, *, placement: AtomPlacement | str = AtomPlacement.LEFT
) -> WagnerResult:
    """Circle polynomial of degree M with small lemniscate at level (log M)^alpha."""
    series = wagner_coefficients(params)
    M = series.M
    logger.info("Wagner R=%s: N=%d, A/E=%.6g, M=%d", params.R, series.N, series.a_ratio, M)
    if M > params.degree_cap:
        raise ValueError(
            f"M = {M} exceeds the degree cap {params.degree_cap}; lower R (currently {params.R})"
        )
    boundedness = generator_boundedness(params, series)
    measure = CircleMeasure(series.fourier_coeffs().astype(np.complex128))
    atoms = equal_mass_partition(measure, M, placement=placement)
    return WagnerResult(
        config=atoms.configuration,
        level=math.log(M) ** params.alpha,
        M=M,
        measure=measure,
        atoms=atoms,
        series=series,
        boundedness=boundedness,
    )


# ---------------------------------------------------------------------------
# Zero-pushing
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PushResult:
    pushed: RootConfiguration
    L: int
    epsilon: float
    comparison_margin: float
    inner_count: int
    failure_bound: float | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "L": self.L,
            "epsilon": self.epsilon,
            "degree": self.pushed.degree,
            "comparison_margin": self.comparison_margin,
            "inner_count": self.inner_count,
            "failure_bound": self.failure_bound,
            "config": self.pushed.to_json(),
        }


def _check_push_input(config: RootConfiguration, epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if config.tag is ConstraintTag.NONE:
        raise ValueError("zero-pushing needs roots in the closed unit disc (UNIT_DISC or UNIT_CIRCLE)")


def pushing_grid(epsilon: float, grid: int) -> np.ndarray:
    """Polar test grid of (1 - epsilon) times the closed disc: grid radii x grid angles."""
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    radii = (1.0 - epsilon) * np.linspace(0.0, 1.0, grid)
    angles = 2 * np.pi * np.arange(grid) / grid
    return (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def _log_dist(z: np.ndarray, points: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z[:, None] - points[None, :])).sum(axis=1)


def _push(
    config: RootConfiguration,
    epsilon: float,
    L: int,
    grid: int,
    replace_inner: Callable[[complex], np.ndarray],
) -> tuple[RootConfiguration, float, int]:
    z = pushing_grid(epsilon, grid)
    pieces: list[tuple[complex, int]] = []
    margin = np.zeros(z.size, dtype=np.float64)
    inner_count = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for w, m in config.roots:
            own = np.log(np.abs(z - w))
            if abs(w) <= 1.0 - epsilon:
                inner_count += 1
                xi = replace_inner(w)
                xi = xi / np.abs(xi)
                pieces.extend((complex(x), m) for x in xi)
                term = _log_dist(z, xi) / L - own
            else:
                target = w if abs(abs(w) - 1.0) <= CIRCLE_TOL else w / abs(w)
                pieces.append((target, m * L))
                term = np.log(np.abs(z - target)) - own
            # +inf where z sits on an original root
            margin += m * term
    pushed = RootConfiguration(tuple(pieces), tag=ConstraintTag.UNIT_CIRCLE)
    return pushed, float(np.min(margin)), inner_count


def push_zeros_deterministic(
    config: RootConfiguration,
    epsilon: float,
    *,
    rounding: str = "floor",
    grid: int = 200,
) -> PushResult:
    """Move every zero to T so that log|p| <= (1/L) log|q| on (1 - eps) D.

    Zeros outside (1 - eps) D go radially to the circle with multiplicity
    times L; a zero w inside is replaced by the L points B_{-w}(zeta_k),
    zeta_k the L-th roots of unity. L = floor(6 / eps^2) (or ceil).
    """
    _check_push_input(config, epsilon)
    if rounding not in ("floor", "ceil"):
        raise ValueError(f"rounding must be 'floor' or 'ceil', got {rounding!r}")
    raw = 6.0 / (epsilon * epsilon)
    L = max(math.floor(raw) if rounding == "floor" else math.ceil(raw), 1)
    zeta = np.array([unit_point(k / L) for k in range(L)], dtype=np.complex128)

    def replace(w: complex) -> np.ndarray:
        return (zeta + w) / (1.0 + np.conj(w) * zeta)

    pushed, margin, inner = _push(config, epsilon, L, grid, replace)
    return PushResult(pushed=pushed, L=L, epsilon=epsilon, comparison_margin=margin, inner_count=inner)


def sample_harmonic_measure(w: complex, size: int, rng: np.random.Generator) -> np.ndarray:
    """Samples on T from the harmonic measure of the disc at w (Poisson kernel)."""
    if not abs(w) < 1.0:
        raise ValueError(f"harmonic measure needs |w| < 1, got {w!r}")
    u = np.exp(2j * np.pi * rng.random(size))
    xi = (u + w) / (1.0 + np.conj(w) * u)
    return xi / np.abs(xi)


def hoeffding_failure_bound(L: int, a_n: float, epsilon: float) -> float:
    """exp(-L a_n eps^4 / (128 (log eps)^2)), the bad-event bound of one sampled zero."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return math.exp(-L * a_n * epsilon ** 4 / (128.0 * math.log(epsilon) ** 2))


@dataclass(frozen=True)
class ProbabilisticParameters:
    n: int
    a_n: float
    epsilon: float
    L: int
    failure_bound: float


def probabilistic_parameters(n: int, a_n: float) -> ProbabilisticParameters:
    """eps = (log n)^-2 and L = ceil(max((log n)^10 / a_n, 1))."""
    if n < 3:
        raise ValueError(f"n must be >= 3 so that (log n)^-2 < 1, got {n}")
    if not a_n > 0:
        raise ValueError(f"a_n must be positive, got {a_n!r}")
    log_n = math.log(n)
    eps = log_n ** -2
    L = math.ceil(max(log_n ** 10 / a_n, 1.0))
    return ProbabilisticParameters(
        n=n, a_n=a_n, epsilon=eps, L=L, failure_bound=hoeffding_failure_bound(L, a_n, eps)
    )


def push_zeros_probabilistic(
    config: RootConfiguration,
    epsilon: float,
    L: int,
    seed: int,
    *,
    grid: int = 200,
    a_n: float | None = None,
) -> PushResult:
    """Like the deterministic push, but inner zeros get L harmonic-measure samples.

    A negative margin is a legitimate outcome and is reported, not raised.
    """
    _check_push_input(config, epsilon)
    if int(L) != L or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    rng = np.random.default_rng(seed)

    def replace(w: complex) -> np.ndarray:
        return sample_harmonic_measure(w, L, rng)

    pushed, margin, inner = _push(config, epsilon, L, grid, replace)
    if margin < 0:
        logger.warning("Probabilistic push (seed=%d, L=%d) has negative margin %.3g", seed, L, margin)
    bound = None if a_n is None else hoeffding_failure_bound(L, a_n, epsilon)
    return PushResult(
        pushed=pushed, L=L, epsilon=epsilon, comparison_margin=margin,
        inner_count=inner, failure_bound=bound,
    )


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def random_configuration(
    degree: int, seed: int, constraint: ConstraintTag | str = ConstraintTag.UNIT_DISC
) -> RootConfiguration:
    """Seeded uniform zeros in the closed disc (by area) or on the circle."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    constraint = ConstraintTag(constraint)
    rng = np.random.default_rng(seed)
    theta = rng.random(degree)
    if constraint is ConstraintTag.UNIT_CIRCLE:
        return RootConfiguration.from_angles(theta)
    if constraint is ConstraintTag.UNIT_DISC:
        r = np.sqrt(rng.random(degree))
        return RootConfiguration.from_roots(r * np.exp(2j * np.pi * theta), tag=ConstraintTag.UNIT_DISC)
    raise ValueError("random configurations are drawn in the disc or on the circle")


def c_nh(n: int, h: int) -> RootConfiguration:
    """n-th roots of unity with the first h merged into one root at e^{pi i (h-1)/n}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= h <= n:
        raise ValueError(f"h must satisfy 1 <= h <= n = {n}, got {h}")
    turns = [(h - 1) / (2 * n)] + [k / n for k in range(h, n)]
    return RootConfiguration.from_angles(turns, [h] + [1] * (n - h))


class FamilyKind(StrEnum):
    ERDOS = "erdos"
    ERDOS_DEFLATED = "erdos-deflated"
    STRETCHED = "stretched"


def stretch_exponent(n: int) -> int:
    return max(math.ceil(math.log(n)), 1)


def named_family(kind: FamilyKind | str, n: int) -> RootConfiguration:
    kind = FamilyKind(kind)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if kind is FamilyKind.ERDOS:
        return RootConfiguration.from_angles([k / n for k in range(n)])
    deflated = RootConfiguration.from_angles([k / n for k in range(1, n)])
    if kind is FamilyKind.ERDOS_DEFLATED:
        return deflated
    inner = RootConfiguration(((0j, stretch_exponent(n)),), tag=ConstraintTag.UNIT_DISC)
    return compose_with_generator(inner, deflated)
