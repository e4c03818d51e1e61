"""
Numerical checks of the lemniscate inequalities.

Each check computes both sides of one inequality with the estimators in
this package and returns a CheckReport. The margin is positive when the
inequality holds; a check passes when margin >= -tolerance, where the
tolerance comes from the estimators' own error (grid size or sampling
spread).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lemnikit.constructions import (
    WagnerParams,
    WagnerResult,
    push_zeros_deterministic,
    random_configuration,
    wagner_polynomial,
)
from lemnikit.diagnostics import circle_arc_intersections, sign_changes
from lemnikit.geometry import component_count, inradius_estimate, perimeter_estimate
from lemnikit.poly import (
    LevelSetSpec,
    RootConfiguration,
    compose_with_generator,
    log_abs_eval,
)
from lemnikit.potential import potential_gap
from lemnikit.sampling import (
    SamplerConfig,
    combined_stddev,
    estimate_area,
    estimate_area_inside_disc,
    sampler_for,
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLER = SamplerConfig(target_points=100_000, trials=6)


@dataclass(frozen=True)
class CheckReport:
    check: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
        }


def _report(check: str, lhs: float, rhs: float, margin: float, tolerance: float, **details: Any) -> CheckReport:
    passed = bool(margin >= -tolerance)
    if not passed:
        logger.warning("Check %s failed: lhs=%.6g rhs=%.6g margin=%.3g", check, lhs, rhs, margin)
    return CheckReport(
        check=check,
        lhs=float(lhs),
        rhs=float(rhs),
        margin=float(margin),
        tolerance=float(tolerance),
        passed=passed,
        details=details,
    )


# Geometric inequalities
# ---------------------------------------------------------------------------

def verify_inradius_area(
    spec: LevelSetSpec,
    resolution: int = 512,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """rho >= sqrt(A) / (72 pi sqrt(pi) n)."""
    rho = inradius_estimate(spec, resolution, threads=threads)
    area = estimate_area(spec, sampler_for(spec, sampler), threads=threads)
    rhs = math.sqrt(area.mean) / (72.0 * math.pi * math.sqrt(math.pi) * spec.degree)
    return _report(
        "inradius", rho.value, rhs, rho.value - rhs, rho.error_bound,
        area=area.mean, area_stddev=area.stddev,
    )


def verify_perimeter_area(
    spec: LevelSetSpec,
    resolution: int = 2048,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """L <= 4 n sqrt(pi) sqrt(A), 5% tolerance."""
    length = perimeter_estimate(spec, resolution, threads=threads)
    area = estimate_area(spec, sampler_for(spec, sampler), threads=threads)
    rhs = 4.0 * spec.degree * math.sqrt(math.pi) * math.sqrt(area.mean)
    return _report("perimeter", length, rhs, rhs - length, 0.05 * rhs, area=area.mean)


def verify_area_inradius_perimeter(
    spec: LevelSetSpec,
    resolution: int = 1024,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """A <= 18 pi rho L, 10% tolerance."""
    rho = inradius_estimate(spec, resolution, threads=threads)
    length = perimeter_estimate(spec, resolution, threads=threads)
    area = estimate_area(spec, sampler_for(spec, sampler), threads=threads)
    rhs = 18.0 * math.pi * rho.value * length
    return _report(
        "area-inradius-perimeter", area.mean, rhs, rhs - area.mean, 0.10 * rhs,
        inradius=rho.value, perimeter=length,
    )


def verify_disconnected_area(
    spec: LevelSetSpec,
    resolution: int = 1024,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """A >= pi t^2 / (16 n) whenever the lemniscate splits into n components.

    With fewer components the bound is not claimed and the check passes
    with applicable = False.
    """
    n = spec.degree
    components = component_count(spec, resolution, threads=threads)
    area = estimate_area(spec, sampler_for(spec, sampler), threads=threads)
    rhs = math.pi * spec.level ** 2 / (16.0 * n)
    applicable = components == n
    margin = area.mean - rhs
    if not applicable:
        return CheckReport(
            check="disconnected", lhs=area.mean, rhs=rhs, margin=margin, tolerance=0.0,
            passed=True, details={"components": components, "applicable": False},
        )
    return _report(
        "disconnected", area.mean, rhs, margin, 3.0 * area.stddev,
        components=components, applicable=True,
    )


def verify_inside_outside(
    spec: LevelSetSpec,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """m(lemniscate) <= 3 m(lemniscate inside the closed disc)."""
    whole = estimate_area(spec, sampler_for(spec, sampler), threads=threads)
    inner = estimate_area_inside_disc(spec, sampler_for(spec, sampler), threads=threads)
    rhs = 3.0 * inner.mean
    tolerance = 3.0 * math.sqrt(whole.stddev ** 2 + 9.0 * inner.stddev ** 2)
    return _report(
        "inside-outside", whole.mean, rhs, rhs - whole.mean, tolerance,
        ratio=whole.mean / inner.mean if inner.mean > 0 else math.inf,
    )


def verify_crane(
    inner: RootConfiguration,
    outer: RootConfiguration,
    level: float = 1.0,
    sampler: SamplerConfig = DEFAULT_SAMPLER,
    *,
    threads: int | None = None,
) -> CheckReport:
    """m(lemniscate of p(q)) <= pi (m(lemniscate of p) / pi)^(1/d), d = deg q."""
    composed = LevelSetSpec(compose_with_generator(inner, outer), level)
    base = LevelSetSpec(outer, level)
    a_comp = estimate_area(composed, sampler_for(composed, sampler), threads=threads)
    a_base = estimate_area(base, sampler_for(base, sampler), threads=threads)
    d = inner.degree
    rhs = math.pi * (a_base.mean / math.pi) ** (1.0 / d)
    return _report(
        "crane", a_comp.mean, rhs, rhs - a_comp.mean, 4.0 * combined_stddev(a_comp, a_base),
        inner_degree=d, composed_degree=composed.degree,
    )


# ---------------------------------------------------------------------------
# Circle diagnostics
# ---------------------------------------------------------------------------

def verify_reflection(
    config: RootConfiguration, samples: int = 100_000, seed: int = 0
) -> CheckReport:
    """|p(r e^{it})| <= |p((2 - r) e^{it})| for r in (0, 1), zeros in the closed disc."""
    rng = np.random.default_rng(seed)
    r = rng.random(samples)
    direction = np.exp(2j * np.pi * rng.random(samples))
    with np.errstate(invalid="ignore"):
        diff = log_abs_eval(config, r * direction) - log_abs_eval(config, (2.0 - r) * direction)
    diff = np.where(np.isnan(diff), -np.inf, diff)
    tolerance = 1e-12 * config.degree
    violations = int(np.count_nonzero(diff > tolerance))
    worst = float(np.max(diff))
    report = CheckReport(
        check="reflection", lhs=worst, rhs=0.0, margin=-worst, tolerance=tolerance,
        passed=violations == 0, details={"violations": violations, "samples": samples},
    )
    if violations:
        logger.warning("Reflection check: %d violations out of %d samples", violations, samples)
    return report


def verify_sign_changes(
    degree: int,
    level: float = 1.0,
    circles: int = 100,
    seed: int = 0,
    *,
    config: RootConfiguration | None = None,
) -> CheckReport:
    """At most 2n sign changes of log|p| - log t on random circles.

    Draws a fresh random configuration in the disc per circle unless one
    is given.
    """
    rng = np.random.default_rng(seed)
    worst = 0
    for i in range(circles):
        cfg = config if config is not None else random_configuration(degree, seed + i)
        center = complex(*(rng.uniform(-1.5, 1.5, size=2)))
        radius = float(rng.uniform(0.1, 2.0))
        worst = max(worst, sign_changes(cfg, level, center, radius, allow_roots_on_circle=True))
    n = config.degree if config is not None else degree
    return _report("sign-changes", worst, 2 * n, 2 * n - worst, 0.0, circles=circles)


def verify_arc_lengths(spec: LevelSetSpec, angular_samples: int | None = None) -> CheckReport:
    """At most n arcs on T; the empirical constant n * sum l_j^2 is reported."""
    arcs = circle_arc_intersections(spec, angular_samples)
    k = len(arcs.arcs)
    n = spec.degree
    return _report(
        "arcs", k, n, n - k, 0.0,
        lengths=list(arcs.lengths), square_sum=arcs.square_sum,
        lambda_empirical=n * arcs.square_sum, total_length=arcs.total_length,
    )


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def verify_pushing(config: RootConfiguration, epsilon: float, grid: int = 200) -> CheckReport:
    """(1/L) log|q| - log|p| >= 0 on (1 - eps) times the closed disc."""
    result = push_zeros_deterministic(config, epsilon, grid=grid)
    return _report(
        "pushing", result.comparison_margin, 0.0, result.comparison_margin, 0.0,
        L=result.L, degree=result.pushed.degree, expected_degree=result.L * config.degree,
        inner_count=result.inner_count,
    )


def verify_wagner(
    params: WagnerParams,
    grid: int = 10_000,
    containment_points: int = 1000,
    *,
    result: WagnerResult | None = None,
) -> CheckReport:
    """Density within [1/2, 3/2], and log|p_M| > alpha log log M on |z| = 3."""
    result = wagner_polynomial(params) if result is None else result
    vmin, vmax = result.measure.density_bounds(grid)
    ring = 3.0 * np.exp(2j * np.pi * np.arange(containment_points) / containment_points)
    lhs = float(np.min(log_abs_eval(result.config, ring)))
    rhs = params.alpha * math.log(math.log(result.M))
    density_ok = vmin >= 0.5 - 1e-9 and vmax <= 1.5 + 1e-9
    margin = lhs - rhs if density_ok else min(lhs - rhs, vmin - 0.5, 1.5 - vmax)
    return _report(
        "wagner", lhs, rhs, margin, 0.0,
        M=result.M, N=result.series.N, density_min=vmin, density_max=vmax,
        lower_bound=result.M * math.log(2.0), boundedness_ok=result.boundedness.ok,
    )


def verify_discretization(
    result: WagnerResult, samples: int = 2000, seed: int = 0
) -> CheckReport:
    """|U_mu - U_nu| <= 4R/M away from the annulus 1 - 1/R < |z| < 1 + 1/R."""
    R = result.series.R
    rng = np.random.default_rng(seed)
    inner_r = (1.0 - 1.0 / R) * rng.random(samples // 2)
    outer_r = (1.0 + 1.0 / R) + (2.0 - 1.0 / R) * rng.random(samples - samples // 2)
    radii = np.concatenate([inner_r, outer_r])
    pts = radii * np.exp(2j * np.pi * rng.random(samples))
    gap = potential_gap(result.measure, result.atoms, pts)
    rhs = 4.0 * R / result.M
    return _report("discretization", gap, rhs, rhs - gap, 0.0, M=result.M)
