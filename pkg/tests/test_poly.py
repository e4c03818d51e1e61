"""Unit tests for root configurations and log-domain evaluation."""

import json
import math

import mpmath
import numpy as np
import pytest

from lemnikit.constructions import FamilyKind, named_family
from lemnikit.poly import (
    ConstraintTag,
    LevelSetSpec,
    RootConfiguration,
    blaschke_map,
    compose_with_generator,
    concat,
    conjugate,
    dumps_config,
    infer_tag,
    loads_config,
    log_abs_eval,
    membership,
    power,
    rotate,
    unit_point,
)


def _mp_log_abs(config: RootConfiguration, z: complex) -> float:
    with mpmath.workdps(50):
        total = mpmath.mpf(0)
        for w, m in config.roots:
            total += m * mpmath.log(abs(mpmath.mpc(z) - mpmath.mpc(w)))
        return float(total)


@pytest.fixture()
def mixed() -> RootConfiguration:
    return RootConfiguration.from_roots([0.3 + 0.4j, -0.5, 1j, 0.9 - 0.1j], [1, 2, 1, 3])


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------

def test_unit_point_exact_at_quarter_turns() -> None:
    assert unit_point(0.0) == 1
    assert unit_point(0.25) == 1j
    assert unit_point(0.5) == -1
    assert unit_point(0.75) == -1j
    assert unit_point(1.25) == 1j


def test_duplicate_locations_are_merged() -> None:
    cfg = RootConfiguration(((1 + 0j, 1), (1 + 0j, 2), (-1 + 0j, 1)), tag=ConstraintTag.UNIT_CIRCLE)
    assert dict(cfg.roots) == {1 + 0j: 3, -1 + 0j: 1}
    assert cfg.degree == 4


def test_infer_tag() -> None:
    assert infer_tag([1, 1j, -1]) is ConstraintTag.UNIT_CIRCLE
    assert infer_tag([0.5, 1j]) is ConstraintTag.UNIT_DISC
    assert infer_tag([2.0]) is ConstraintTag.NONE


def test_circle_tag_rejects_interior_root() -> None:
    with pytest.raises(ValueError, match="UNIT_CIRCLE"):
        RootConfiguration(((0.9 + 0j, 1),), tag=ConstraintTag.UNIT_CIRCLE)


def test_disc_tag_rejects_outside_root() -> None:
    with pytest.raises(ValueError, match="UNIT_DISC"):
        RootConfiguration(((1.5 + 0j, 1),), tag=ConstraintTag.UNIT_DISC)


def test_empty_configuration_rejected() -> None:
    with pytest.raises(ValueError):
        RootConfiguration(())


@pytest.mark.parametrize("mult", [0, -1, 1.5, True])
def test_bad_multiplicity_rejected(mult) -> None:
    with pytest.raises(ValueError, match=r"roots\[0\]\.mult"):
        RootConfiguration(((0j, mult),))


def test_nonfinite_root_rejected() -> None:
    with pytest.raises(ValueError, match="finite"):
        RootConfiguration.from_roots([complex(math.nan, 0)])


def test_angles_sorted_and_repeated() -> None:
    cfg = RootConfiguration.from_angles([0.5, 0.0, 0.25], [1, 2, 1])
    np.testing.assert_allclose(cfg.angles(), [0.0, 0.0, math.pi / 2, math.pi])


def test_level_must_be_positive(mixed) -> None:
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError, match="level"):
            LevelSetSpec(mixed, bad)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def test_angles_shorthand() -> None:
    cfg = loads_config('{"angles_over_2pi": [0, 0.5], "mults": [2, 1]}')
    assert cfg.tag is ConstraintTag.UNIT_CIRCLE
    assert cfg.degree == 3
    assert dict(cfg.roots)[1 + 0j] == 2


def test_json_preserves_roots_and_tag(mixed) -> None:
    again = loads_config(dumps_config(mixed))
    assert again == mixed


def test_json_error_names_field() -> None:
    text = json.dumps({"roots": [{"re": 0, "im": 0}, {"re": 0.5}, {"re": 0.1, "mult": 0}]})
    with pytest.raises(ValueError, match=r"roots\[2\]\.mult"):
        loads_config(text)


def test_json_unknown_tag() -> None:
    with pytest.raises(ValueError, match="tag"):
        loads_config('{"roots": [{"re": 0, "im": 0}], "tag": "SQUARE"}')


def test_json_syntax_error_has_location() -> None:
    with pytest.raises(json.JSONDecodeError) as info:
        loads_config('{\n  "roots": [\n    {"re": 1,}\n  ]\n}')
    assert info.value.lineno == 3


def test_json_non_number_angle() -> None:
    with pytest.raises(ValueError, match=r"angles_over_2pi\[1\]"):
        loads_config('{"angles_over_2pi": [0, "x"]}')


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def test_log_abs_eval_matches_high_precision(mixed) -> None:
    pts = [0.1 + 0.2j, -0.7 + 0.05j, 2.0 - 1.0j, 0.9 - 0.1000001j]
    got = log_abs_eval(mixed, np.array(pts))
    for z, value in zip(pts, got, strict=True):
        assert value == pytest.approx(_mp_log_abs(mixed, z), abs=1e-10)


def test_log_abs_eval_scalar_and_shape(mixed) -> None:
    assert isinstance(log_abs_eval(mixed, 0.2), float)
    grid = np.zeros((3, 4), dtype=np.complex128)
    assert log_abs_eval(mixed, grid).shape == (3, 4)


def test_log_abs_eval_is_minus_inf_at_root(mixed) -> None:
    assert log_abs_eval(mixed, -0.5) == -math.inf


def test_high_degree_stays_finite() -> None:
    cfg = named_family(FamilyKind.ERDOS, 2000)
    value = log_abs_eval(cfg, 3.0)
    # |3^2000 - 1| overflows as a float; its log does not
    assert math.isfinite(value)
    assert value == pytest.approx(2000 * math.log(3.0), rel=1e-12)


def test_membership_is_strict(unit_root) -> None:
    spec = LevelSetSpec(unit_root, 1.0)
    assert membership(spec, 1.5) is True
    assert membership(spec, 0.0) is False  # |0 - 1| = 1 is on the boundary
    np.testing.assert_array_equal(membership(spec, np.array([1.0, 3.0])), [True, False])


# ---------------------------------------------------------------------------
# Blaschke map
# ---------------------------------------------------------------------------

def test_blaschke_maps_circle_to_circle() -> None:
    z = np.exp(2j * np.pi * np.linspace(0, 1, 50, endpoint=False))
    out = blaschke_map(0.4 - 0.3j, z)
    np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-14)
    assert blaschke_map(0.4 - 0.3j, 0.4 - 0.3j) == 0


def test_blaschke_rejects_parameter_outside_disc() -> None:
    with pytest.raises(ValueError, match=r"\|a\| < 1"):
        blaschke_map(1.0, 0.5)


def test_blaschke_rejects_points_outside_disc() -> None:
    with pytest.raises(ValueError, match="closed unit disc"):
        blaschke_map(0.2, 2.0)


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def test_power_scales_log(mixed) -> None:
    z = np.array([0.2 + 0.7j, 1.3])
    np.testing.assert_allclose(log_abs_eval(power(mixed, 3), z), 3 * log_abs_eval(mixed, z))


def test_rotate_moves_level_set(mixed) -> None:
    omega = unit_point(0.1)
    z = np.array([0.2 + 0.7j, 1.3, -0.4j])
    np.testing.assert_allclose(
        log_abs_eval(rotate(mixed, omega), omega * z), log_abs_eval(mixed, z), atol=1e-13
    )


def test_rotate_rejects_non_unimodular(mixed) -> None:
    with pytest.raises(ValueError, match="unimodular"):
        rotate(mixed, 2.0)


def test_conjugate_reflects(mixed) -> None:
    z = np.array([0.2 + 0.7j, 1.3 - 0.2j])
    np.testing.assert_allclose(log_abs_eval(conjugate(mixed), np.conj(z)), log_abs_eval(mixed, z))


def test_concat_adds_logs(mixed, unit_root) -> None:
    z = np.array([0.2 + 0.7j, -1.3])
    joined = concat(mixed, unit_root)
    assert joined.degree == mixed.degree + 1
    np.testing.assert_allclose(
        log_abs_eval(joined, z), log_abs_eval(mixed, z) + log_abs_eval(unit_root, z)
    )


def test_concat_takes_weaker_tag(unit_root) -> None:
    far = RootConfiguration.from_roots([3.0])
    assert concat(unit_root, far).tag is ConstraintTag.NONE


def test_compose_with_monomial() -> None:
    outer = named_family(FamilyKind.ERDOS, 3)
    inner = RootConfiguration(((0j, 2),), tag=ConstraintTag.UNIT_DISC)
    composed = compose_with_generator(inner, outer)
    assert composed.degree == 6
    assert composed.tag is ConstraintTag.UNIT_CIRCLE
    z = np.array([0.3 + 0.2j, 1.1 - 0.5j])
    np.testing.assert_allclose(log_abs_eval(composed, z), log_abs_eval(outer, z ** 2), atol=1e-12)


def test_compose_with_general_inner() -> None:
    inner = RootConfiguration.from_roots([0.5, -0.3 + 0.1j])
    outer = RootConfiguration.from_roots([1.0, -1j], [2, 1])
    composed = compose_with_generator(inner, outer)
    assert composed.degree == 6
    z = np.array([0.3 + 0.2j, 1.1 - 0.5j, -0.7j])
    q = (z - 0.5) * (z - (-0.3 + 0.1j))
    np.testing.assert_allclose(log_abs_eval(composed, z), log_abs_eval(outer, q), atol=1e-8)


GRID = np.add.outer(1j * np.linspace(-1.5, 1.5, 100), np.linspace(-1.5, 1.5, 100))


@pytest.mark.parametrize(
    "inner",
    [
        RootConfiguration(((0j, 2),), tag=ConstraintTag.UNIT_DISC),
        RootConfiguration.from_roots([0.5, -0.3 + 0.1j]),
        RootConfiguration.from_roots([0.2j, -0.6, 0.7 - 0.2j]),
    ],
    ids=["z^2", "two-roots", "three-roots"],
)
@pytest.mark.parametrize("level", [0.5, 1.0])
def test_compose_membership_on_grid(inner: RootConfiguration, level: float) -> None:
    outer = RootConfiguration.from_roots([1.0, -1j, 0.3], [2, 1, 1])
    composed = compose_with_generator(inner, outer)
    q = np.polyval(np.poly(np.repeat(inner.locations, inner.multiplicities)), GRID)
    expected = membership(LevelSetSpec(outer, level), q)
    got = membership(LevelSetSpec(composed, level), GRID)
    assert got.shape == (100, 100)
    assert np.array_equal(got, expected)


@pytest.mark.parametrize("level", [0.5, 1.0, 2.0])
def test_membership_is_conjugation_invariant(mixed, level: float) -> None:
    mirrored = conjugate(mixed)
    inside = membership(LevelSetSpec(mixed, level), GRID)
    assert np.array_equal(membership(LevelSetSpec(mirrored, level), np.conj(GRID)), inside)
    assert inside.any() and not inside.all()
