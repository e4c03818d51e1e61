"""Unit tests for circle diagnostics: arcs, sign changes, doubling, discrepancy."""

import math

import pytest

from lemnikit.constructions import FamilyKind, c_nh, named_family, random_configuration
from lemnikit.diagnostics import (
    TWO_PI,
    ArcList,
    arc_square_sum,
    circle_arc_intersections,
    discrepancy,
    doubling_exponent,
    erdos_turan_bound,
    sign_changes,
)
from lemnikit.poly import ConstraintTag, LevelSetSpec, RootConfiguration, rotate, unit_point


# ---------------------------------------------------------------------------
# Arcs
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_arcs_of_erdos_family(n: int) -> None:
    arcs = circle_arc_intersections(LevelSetSpec(named_family(FamilyKind.ERDOS, n), 1.0))
    assert len(arcs.arcs) == n
    for length in arcs.lengths:
        assert length == pytest.approx(2 * math.pi / (3 * n), abs=1e-6)
    assert arcs.square_sum == pytest.approx(4 * math.pi ** 2 / (9 * n), abs=1e-5)


def test_arc_midpoints_sit_at_roots() -> None:
    arcs = circle_arc_intersections(LevelSetSpec(named_family(FamilyKind.ERDOS, 4), 1.0))
    mids = sorted(arcs.midpoints().tolist())
    for got, want in zip(mids, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2], strict=True):
        assert min(abs(got - want), TWO_PI - abs(got - want)) < 1e-6


def test_arcs_whole_circle(origin_root) -> None:
    arcs = circle_arc_intersections(LevelSetSpec(origin_root, 2.0))
    assert arcs.arcs == ((0.0, TWO_PI),)
    assert arcs.total_length == pytest.approx(TWO_PI)


def test_arcs_empty(origin_root) -> None:
    assert circle_arc_intersections(LevelSetSpec(origin_root, 0.5)) == ArcList()


def test_arcs_reject_coarse_sampling(erdos3) -> None:
    with pytest.raises(ValueError, match="angular_samples"):
        circle_arc_intersections(erdos3, angular_samples=16)


def test_arc_square_sum() -> None:
    assert arc_square_sum(ArcList(arcs=((0.0, 1.0), (2.0, 4.0)), lengths=(1.0, 2.0))) == 5.0


# ---------------------------------------------------------------------------
# Sign changes
# ---------------------------------------------------------------------------

def test_sign_changes_on_unit_circle(erdos3) -> None:
    assert sign_changes(erdos3.config, 1.0, allow_roots_on_circle=True) == 6


def test_sign_changes_far_circle(erdos3) -> None:
    assert sign_changes(erdos3.config, 1.0, center=10.0, radius=0.5) == 0


def test_sign_changes_bounded_on_random_circles() -> None:
    cfg = random_configuration(6, seed=11)
    for k in range(20):
        center = 0.1 * k * unit_point(k / 7)
        assert sign_changes(cfg, 0.8, center, 0.3 + 0.1 * k) <= 12


def test_sign_changes_rejects_root_on_circle(erdos3) -> None:
    with pytest.raises(ValueError, match="within"):
        sign_changes(erdos3.config, 1.0)
    with pytest.raises(ValueError, match="within"):
        sign_changes(erdos3.config, 1.0, center=1.0, radius=math.sqrt(3))
    assert sign_changes(erdos3.config, 2.0, radius=0.5) == 0


def test_sign_changes_identically_zero(origin_root) -> None:
    assert sign_changes(origin_root, 1.0) == 0


def test_sign_changes_rejects_bad_level(erdos3) -> None:
    with pytest.raises(ValueError, match="level"):
        sign_changes(erdos3.config, 0.0)


# ---------------------------------------------------------------------------
# Doubling exponent
# ---------------------------------------------------------------------------

def test_doubling_exponent_single_root(unit_root) -> None:
    report = doubling_exponent(unit_root, shrink=0.98)
    # v(z) = log|0.98 z - 1|: extremes at z = 1 and z = 1/2
    assert report.sup_disc == pytest.approx(-math.log(0.02), rel=1e-9)
    assert report.sup_half_disc == pytest.approx(-math.log(0.51), rel=1e-9)
    assert report.beta == pytest.approx(math.log(math.log(0.02) / math.log(0.51)), rel=1e-9)
    assert report.sup_positive == pytest.approx(math.log(1.98), rel=1e-9)
    assert report.beta_star == 3.0


def test_doubling_exponent_needs_circle_roots(origin_root) -> None:
    with pytest.raises(ValueError, match="UNIT_CIRCLE"):
        doubling_exponent(origin_root)


def test_doubling_exponent_rejects_bad_shrink(unit_root) -> None:
    with pytest.raises(ValueError, match="shrink"):
        doubling_exponent(unit_root, shrink=1.0)


# ---------------------------------------------------------------------------
# Discrepancy
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 3, 7, 12])
def test_discrepancy_of_roots_of_unity(n: int) -> None:
    assert discrepancy(RootConfiguration.from_angles([k / n for k in range(n)])) == pytest.approx(1 / n, abs=1e-12)


def test_discrepancy_is_rotation_invariant() -> None:
    cfg = c_nh(6, 2)
    assert discrepancy(rotate(cfg, unit_point(0.37))) == pytest.approx(discrepancy(cfg), abs=1e-12)


def test_discrepancy_of_merged_family() -> None:
    assert discrepancy(c_nh(8, 3)) == pytest.approx(3 / 8, abs=1e-12)


def test_discrepancy_of_single_cluster() -> None:
    cfg = RootConfiguration(((1 + 0j, 5),), tag=ConstraintTag.UNIT_CIRCLE)
    assert discrepancy(cfg) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_erdos_turan_bounds_discrepancy(seed: int) -> None:
    cfg = random_configuration(9, seed, constraint=ConstraintTag.UNIT_CIRCLE)
    assert erdos_turan_bound(cfg) >= discrepancy(cfg)
    assert erdos_turan_bound(cfg, K=30) >= discrepancy(cfg)


def test_erdos_turan_rejects_bad_k(erdos3) -> None:
    with pytest.raises(ValueError, match="K"):
        erdos_turan_bound(erdos3.config, K=0)
