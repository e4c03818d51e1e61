"""Shared fixtures for the numerical tests."""

import pytest

from lemnikit.constructions import FamilyKind, named_family
from lemnikit.poly import LevelSetSpec, RootConfiguration
from lemnikit.sampling import SamplerConfig


@pytest.fixture(autouse=True)
def _fixed_threads(monkeypatch):
    """Pin the worker count independent of the test machine."""
    monkeypatch.setenv("LEMNIKIT_THREADS", "2")


@pytest.fixture()
def unit_root() -> RootConfiguration:
    """p(z) = z - 1."""
    return RootConfiguration.from_angles([0.0])


@pytest.fixture()
def origin_root() -> RootConfiguration:
    """p(z) = z, whose lemniscate at level t is the disc of radius t."""
    return RootConfiguration.from_roots([0j])


@pytest.fixture()
def erdos3() -> LevelSetSpec:
    return LevelSetSpec(named_family(FamilyKind.ERDOS, 3), 1.0)


@pytest.fixture()
def fast_sampler() -> SamplerConfig:
    return SamplerConfig(target_points=20_000, trials=4, seed=0)
