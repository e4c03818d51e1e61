"""Tests for recipes.yaml presets, the table recipes and run manifests."""

import hashlib
import json
import math
from importlib.metadata import PackageNotFoundError
from pathlib import Path
from unittest.mock import patch

import pytest

from lemnikit.recipes import (
    BENCH_CSV_FIELDS,
    EXPECTED_MINIMIZERS,
    TABLE_GRIDS,
    build_manifest,
    bench_samplers,
    format_area,
    load_presets,
    max_abs_error,
    package_versions,
    spec_hash,
    table_minimizers,
    write_manifest,
)
from lemnikit.sampling import SamplerConfig, SamplerKind

REPO_PRESETS = Path(__file__).resolve().parents[1] / "recipes.yaml"


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "recipes.yaml"
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def test_repo_presets_load() -> None:
    presets = load_presets(REPO_PRESETS)
    assert presets.sampler("quick") == SamplerConfig(target_points=20_000, trials=4, seed=0)
    assert presets.sampler("bench-square").kind is SamplerKind.SQUARE_LATTICE
    assert presets.sampler("confirm").seed == 1
    search = presets.search("table-n5")
    assert (search.n, search.m, search.level, search.sampler) == (5, 20, 1.0, "quick")
    assert presets.search("near-one-n4").level == 0.999
    assert search.min_q == 0
    assert presets.search("merged-n7").min_q == 2


def test_repo_search_presets_match_table_grids() -> None:
    presets = load_presets(REPO_PRESETS)
    for n, m in TABLE_GRIDS.items():
        assert presets.search(f"table-n{n}").m == m


def test_unknown_preset_name() -> None:
    presets = load_presets(REPO_PRESETS)
    with pytest.raises(KeyError, match="unknown preset 'nope'"):
        presets.sampler("nope")
    with pytest.raises(KeyError, match="unknown preset 'nope'"):
        presets.search("nope")


def test_missing_presets_file(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError, match="not found"):
        load_presets(tmp_path / "missing.yaml")


def test_empty_presets_file(tmp_path: Path) -> None:
    presets = load_presets(_write(tmp_path, ""))
    assert presets.samplers == {}
    assert presets.searches == {}


def test_sampler_defaults(tmp_path: Path) -> None:
    presets = load_presets(_write(tmp_path, "samplers:\n  plain: {}\n"))
    assert presets.sampler("plain") == SamplerConfig()


@pytest.mark.parametrize(
    "text,match",
    [
        ("- a\n- b\n", "top level must be a mapping"),
        ("samplers: [1, 2]\n", "'samplers' must be a mapping"),
        ("searches: 3\n", "'searches' must be a mapping"),
        ("samplers:\n  a: 5\n", "sampler 'a' must be a mapping"),
        ("samplers:\n  a: {kind: hexagonal}\n", "unknown kind"),
        ("samplers:\n  a: {p: lots}\n", r"samplers\.a\.p must be an integer"),
        ("samplers:\n  a: {trials: 2.5}\n", r"samplers\.a\.trials must be an integer"),
        ("searches:\n  s: {n: 3, m: 24, sampler: quick}\n", "unknown sampler 'quick'"),
        (
            "samplers:\n  q: {}\nsearches:\n  s: {n: 3, m: 24, sampler: q, level: -1}\n",
            r"searches\.s\.level must be a positive number",
        ),
        (
            "samplers:\n  q: {}\nsearches:\n  s: {n: three, m: 24, sampler: q}\n",
            r"searches\.s\.n must be an integer",
        ),
        (
            "samplers:\n  q: {}\nsearches:\n  s: {n: 7, m: 28, sampler: q, min_q: two}\n",
            r"searches\.s\.min_q must be an integer",
        ),
    ],
)
def test_bad_presets(tmp_path: Path, text: str, match: str) -> None:
    with pytest.raises(ValueError, match=match):
        load_presets(_write(tmp_path, text))


def test_preset_sampler_is_validated(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="target_points"):
        load_presets(_write(tmp_path, "samplers:\n  tiny: {p: 10}\n"))


# ---------------------------------------------------------------------------
# Table recipes
# ---------------------------------------------------------------------------

def test_bench_samplers_small() -> None:
    rows = bench_samplers(3, target_points=20_000, trials=2)
    assert [row["n"] for row in rows] == [2, 3]
    assert set(rows[0]) == set(BENCH_CSV_FIELDS)
    assert rows[0]["closed_form"] == pytest.approx(2.0)
    for kind in SamplerKind:
        assert max_abs_error(rows, kind) < 0.1


def test_bench_samplers_rejects_small_n() -> None:
    with pytest.raises(ValueError, match="n_max"):
        bench_samplers(1)


@pytest.mark.slow
def test_bench_triangular_is_accurate() -> None:
    rows = bench_samplers(10)
    assert max_abs_error(rows, SamplerKind.TRIANGULAR_LATTICE) < 3e-3


def test_table_minimizers_single_grid() -> None:
    rows = table_minimizers(SamplerConfig(target_points=50_000, trials=4), grids={3: 24})
    assert len(rows) == 1
    row = rows[0]
    assert (row.n, row.m, row.expected_h) == (3, 24, EXPECTED_MINIMIZERS[3])
    assert row.matches
    assert row.to_json()["found"]["tag"] == "UNIT_CIRCLE"


@pytest.mark.slow
def test_table_minimizers_all_grids() -> None:
    rows = table_minimizers(SamplerConfig(target_points=50_000, trials=4))
    assert [row.n for row in rows] == sorted(TABLE_GRIDS)
    assert all(row.matches for row in rows)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def test_spec_hash_ignores_key_order() -> None:
    a = spec_hash({"t": 1.0, "sampler": {"p": 100, "seed": 0}})
    b = spec_hash({"sampler": {"seed": 0, "p": 100}, "t": 1.0})
    assert a == b
    assert len(a) == 12
    assert a != spec_hash({"t": 2.0, "sampler": {"p": 100, "seed": 0}})


def test_build_and_write_manifest(tmp_path: Path) -> None:
    out = tmp_path / "area.csv"
    out.write_text("spec_id,mean\nx,1.0\n")
    manifest = build_manifest(["lemnikit", "area"], 3, {"t": 1.0}, [out], "2026-01-01T00:00:00+00:00")
    assert manifest.outputs == {"area.csv": hashlib.sha256(out.read_bytes()).hexdigest()}
    assert manifest.spec_hash == spec_hash({"t": 1.0})
    assert manifest.started_at == "2026-01-01T00:00:00+00:00"
    assert manifest.finished_at >= manifest.started_at
    path = write_manifest(manifest, tmp_path)
    payload = json.loads(path.read_text())
    assert payload["seed"] == 3
    assert payload["command"] == ["lemnikit", "area"]
    assert set(payload["versions"]) >= {"numpy", "scipy"}


def test_package_versions_unknown() -> None:
    with patch("lemnikit.recipes.version", side_effect=PackageNotFoundError("x")):
        assert set(package_versions().values()) == {"unknown"}


def test_format_area() -> None:
    assert format_area(math.nan) == "nan"
    assert format_area(1.5) == "1.500000"
