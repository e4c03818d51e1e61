"""Unit tests for the Wagner construction, zero-pushing and named families."""

import logging
import math

import numpy as np
import pytest

from lemnikit.constructions import (
    FamilyKind,
    WagnerParams,
    c_nh,
    generator_boundedness,
    strip_points,
    hoeffding_failure_bound,
    named_family,
    probabilistic_parameters,
    push_zeros_deterministic,
    push_zeros_probabilistic,
    pushing_grid,
    random_configuration,
    sample_harmonic_measure,
    stretch_exponent,
    wagner_coefficients,
    wagner_polynomial,
)
from lemnikit.poly import ConstraintTag, LevelSetSpec, RootConfiguration, unit_point
from lemnikit.sampling import SamplerConfig, estimate_area


# ---------------------------------------------------------------------------
# Wagner series
# ---------------------------------------------------------------------------

def test_wagner_params_validation() -> None:
    with pytest.raises(ValueError, match="R must"):
        WagnerParams(R=1.0)
    with pytest.raises(ValueError, match="truncation_tolerance"):
        WagnerParams(R=1.2, truncation_tolerance=0.0)
    with pytest.raises(ValueError, match="alpha"):
        WagnerParams(R=1.2, alpha=0.0)
    with pytest.raises(ValueError, match="unknown generator"):
        WagnerParams(R=1.2, generator="sin")


def test_exp_exp_leading_coefficients() -> None:
    R = 1.2
    series = wagner_coefficients(WagnerParams(R=R))
    e = math.exp(R)
    assert series.b[0] == 1.0
    assert series.b[1] == pytest.approx(e, rel=1e-12)
    assert series.b[2] == pytest.approx((e + e * e) / 2, rel=1e-12)
    np.testing.assert_allclose(series.weighted, series.b * (R / 2) ** np.arange(series.N + 1), rtol=1e-12)


def test_exp_generator_gives_factorials() -> None:
    series = wagner_coefficients(WagnerParams(R=1.2, generator="exp"))
    expected = [1 / math.factorial(k) for k in range(series.N + 1)]
    np.testing.assert_allclose(series.b, expected, rtol=1e-12)
    # sum_k w_k = e^{R/2} up to the tail
    assert series.weighted.sum() == pytest.approx(math.exp(0.6), abs=2 * series.tail_bound + 1e-12)


def test_truncation_respects_tolerance() -> None:
    params = WagnerParams(R=1.3, truncation_tolerance=1e-10)
    series = wagner_coefficients(params)
    assert series.N >= 1
    assert series.tail_bound <= params.truncation_tolerance
    assert series.a_ratio > 0
    assert series.M == math.ceil(16 * params.R * series.a_ratio)


def test_fourier_coefficients_keep_density_in_range() -> None:
    series = wagner_coefficients(WagnerParams(R=1.2))
    c = series.fourier_coeffs()
    assert np.all(c > 0)
    # 2 sum c_k = 1/2, so the density stays within [1/2, 3/2]
    assert 2 * c.sum() == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("generator", ["exp-exp", "exp"])
def test_generator_boundedness(generator: str) -> None:
    check = generator_boundedness(WagnerParams(R=1.25, generator=generator))
    assert check.ok
    assert check.max_modulus <= check.series_bound * (1 + 1e-9) + 1e-12


def test_strip_points_lie_in_strip() -> None:
    assert strip_points(1.2).size == 0
    w = strip_points(3.0)
    assert w.size > 0
    assert np.all(np.abs(w) <= 3.0)
    assert np.all((np.abs(w.imag) >= 0.5 * math.pi) & (np.abs(w.imag) <= 1.5 * math.pi))


def test_exp_exp_is_small_on_strip() -> None:
    check = generator_boundedness(WagnerParams(R=3.0))
    assert check.strip_ok
    # |E(R + w)| / E(R) <= exp(-e^R) where cos(Im w) <= 0
    assert check.strip_max <= math.exp(-math.exp(3.0)) * (1 + 1e-9)


def test_exp_generator_fails_on_strip(caplog) -> None:
    with caplog.at_level(logging.WARNING, logger="lemnikit.constructions"):
        check = generator_boundedness(WagnerParams(R=2.0, generator="exp"))
    assert not check.strip_ok
    assert not check.ok
    assert check.strip_max > 0.5
    assert "fails the boundedness check" in caplog.text


def test_wagner_polynomial_small() -> None:
    result = wagner_polynomial(WagnerParams(R=1.2, generator="exp"))
    assert result.config.degree == result.M
    assert result.config.tag is ConstraintTag.UNIT_CIRCLE
    assert result.level == pytest.approx(math.log(result.M))
    assert np.all(np.diff(result.atoms.angles) > 0)
    assert result.boundedness.ok
    payload = result.to_json()
    assert payload["M"] == result.M
    assert payload["boundedness_ok"] is True


def test_wagner_degree_cap() -> None:
    with pytest.raises(ValueError, match="degree cap"):
        wagner_polynomial(WagnerParams(R=1.2, generator="exp", degree_cap=10))


@pytest.mark.slow
def test_wagner_area_decreases_with_R() -> None:
    sampler = SamplerConfig(target_points=50_000, trials=3)
    areas = []
    for R in (1.05, 1.2, 1.35):
        result = wagner_polynomial(WagnerParams(R=R))
        areas.append(estimate_area(LevelSetSpec(result.config, result.level), sampler))
    assert areas[-1].mean < areas[0].mean
    for before, after in zip(areas, areas[1:]):
        spread = math.hypot(before.stddev, after.stddev)
        assert after.mean <= before.mean + 3 * spread


# ---------------------------------------------------------------------------
# Deterministic pushing
# ---------------------------------------------------------------------------

def test_pushing_grid_shape() -> None:
    z = pushing_grid(0.3, 20)
    assert z.size == 400
    assert np.max(np.abs(z)) == pytest.approx(0.7)
    with pytest.raises(ValueError, match="grid"):
        pushing_grid(0.3, 1)


@pytest.mark.parametrize("seed", range(20))
def test_push_certificate_on_random_configs(seed: int) -> None:
    cfg = random_configuration(10, seed)
    result = push_zeros_deterministic(cfg, 0.3)
    assert result.L == 66
    assert result.pushed.degree == 66 * 10
    assert result.pushed.tag is ConstraintTag.UNIT_CIRCLE
    assert result.comparison_margin >= 0


def test_push_rounding_mode() -> None:
    cfg = random_configuration(7, 3)
    assert push_zeros_deterministic(cfg, 0.3).pushed.degree == 462
    assert push_zeros_deterministic(cfg, 0.3, rounding="ceil").L == 67
    with pytest.raises(ValueError, match="rounding"):
        push_zeros_deterministic(cfg, 0.3, rounding="round")


def test_push_keeps_circle_roots(unit_root) -> None:
    result = push_zeros_deterministic(unit_root, 0.3)
    assert dict(result.pushed.roots) == {1 + 0j: 66}
    assert result.inner_count == 0
    assert result.comparison_margin == pytest.approx(0.0, abs=1e-12)


def test_push_replaces_origin_by_roots_of_unity(origin_root) -> None:
    result = push_zeros_deterministic(origin_root, 0.5)
    assert result.L == 24
    assert result.inner_count == 1
    np.testing.assert_allclose(np.abs(result.pushed.locations), 1.0, atol=1e-14)
    assert result.comparison_margin >= -1e-12


def test_push_rejects_bad_input(unit_root) -> None:
    with pytest.raises(ValueError, match="epsilon"):
        push_zeros_deterministic(unit_root, 1.0)
    with pytest.raises(ValueError, match="closed unit disc"):
        push_zeros_deterministic(RootConfiguration.from_roots([2.0]), 0.3)


# ---------------------------------------------------------------------------
# Probabilistic pushing
# ---------------------------------------------------------------------------

def test_harmonic_measure_samples() -> None:
    rng = np.random.default_rng(0)
    xi = sample_harmonic_measure(0.5 + 0.2j, 200_000, rng)
    np.testing.assert_allclose(np.abs(xi), 1.0, atol=1e-14)
    # xi is harmonic, so its mean is its value at w
    assert abs(xi.mean() - (0.5 + 0.2j)) < 0.01
    with pytest.raises(ValueError, match=r"\|w\| < 1"):
        sample_harmonic_measure(1.0, 10, rng)


def test_hoeffding_bound() -> None:
    assert hoeffding_failure_bound(0, 1.0, 0.3) == 1.0
    assert hoeffding_failure_bound(1000, 1.0, 0.3) < hoeffding_failure_bound(100, 1.0, 0.3)
    with pytest.raises(ValueError, match="epsilon"):
        hoeffding_failure_bound(10, 1.0, 0.0)


def test_probabilistic_parameters() -> None:
    params = probabilistic_parameters(100, 2.0)
    log_n = math.log(100)
    assert params.epsilon == pytest.approx(log_n ** -2)
    assert params.L == math.ceil(log_n ** 10 / 2.0)
    assert 0.0 < params.failure_bound <= 1.0
    with pytest.raises(ValueError, match="n must"):
        probabilistic_parameters(2, 1.0)
    with pytest.raises(ValueError, match="a_n"):
        probabilistic_parameters(10, 0.0)


def test_probabilistic_push_is_seeded() -> None:
    cfg = random_configuration(10, 4)
    a = push_zeros_probabilistic(cfg, 0.3, 100, seed=9, grid=40)
    b = push_zeros_probabilistic(cfg, 0.3, 100, seed=9, grid=40)
    c = push_zeros_probabilistic(cfg, 0.3, 100, seed=10, grid=40)
    assert a.pushed == b.pushed
    assert a.comparison_margin == b.comparison_margin
    assert a.pushed != c.pushed
    assert a.pushed.degree == 1000
    assert a.failure_bound is None
    assert push_zeros_probabilistic(cfg, 0.3, 100, seed=9, grid=40, a_n=1.0).failure_bound is not None


def test_probabilistic_push_rejects_bad_L(unit_root) -> None:
    with pytest.raises(ValueError, match="L must"):
        push_zeros_probabilistic(unit_root, 0.3, 0, seed=0)


@pytest.mark.slow
def test_probabilistic_push_calibration() -> None:
    successes = 0
    for seed in range(100):
        cfg = random_configuration(20, 1000 + seed)
        result = push_zeros_probabilistic(cfg, 0.3, 264, seed=seed, grid=60)
        successes += result.comparison_margin >= 0
    assert successes >= 95


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def test_random_configuration() -> None:
    a = random_configuration(8, 5)
    assert a == random_configuration(8, 5)
    assert a.tag is ConstraintTag.UNIT_DISC
    assert np.all(np.abs(a.locations) <= 1.0)
    circle = random_configuration(8, 5, constraint="UNIT_CIRCLE")
    assert circle.tag is ConstraintTag.UNIT_CIRCLE
    with pytest.raises(ValueError, match="disc or on the circle"):
        random_configuration(8, 5, constraint=ConstraintTag.NONE)
    with pytest.raises(ValueError, match="degree"):
        random_configuration(0, 5)


def test_c_nh_merges_first_roots() -> None:
    cfg = c_nh(8, 3)
    assert cfg.degree == 8
    assert len(cfg.roots) == 6
    assert dict(cfg.roots)[unit_point(2 / 16)] == 3
    assert c_nh(5, 1) == named_family(FamilyKind.ERDOS, 5)
    with pytest.raises(ValueError, match="h must"):
        c_nh(4, 5)


@pytest.mark.parametrize("n,exponent", [(2, 1), (3, 2), (8, 3), (21, 4)])
def test_stretch_exponent(n: int, exponent: int) -> None:
    assert stretch_exponent(n) == exponent


def test_named_families() -> None:
    assert named_family("erdos", 6).degree == 6
    deflated = named_family(FamilyKind.ERDOS_DEFLATED, 6)
    assert deflated.degree == 5
    assert 1 + 0j not in dict(deflated.roots)
    stretched = named_family(FamilyKind.STRETCHED, 8)
    assert stretched.degree == 7 * 3
    with pytest.raises(ValueError):
        named_family("square", 4)
    with pytest.raises(ValueError, match="n must"):
        named_family(FamilyKind.ERDOS, 1)
