"""
Presets, table reproduction recipes and run manifests for the CLI.

recipes.yaml layout:

    samplers:
      quick: {kind: triangular, p: 20000, trials: 4, seed: 0}
    searches:
      table-n3: {n: 3, m: 24, level: 1.0, sampler: quick}
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import yaml

from lemnikit.constructions import FamilyKind, c_nh, named_family
from lemnikit.poly import LevelSetSpec
from lemnikit.sampling import (
    SamplerConfig,
    SamplerKind,
    erdos_area_closed_form,
    estimate_area,
)
from lemnikit.search import SearchSpace, equivalent_configurations, exhaustive_search

logger = logging.getLogger(__name__)

DEFAULT_PRESETS = Path("recipes.yaml")

# Best h of C_{n,h} at level 1, per n
EXPECTED_MINIMIZERS: dict[int, int] = {2: 1, 3: 1, 4: 2, 5: 2, 6: 2, 7: 2, 8: 3}
# Half-circle grids on which the expected minimizers are representable
TABLE_GRIDS: dict[int, int] = {3: 24, 4: 24, 5: 20, 6: 24}
TABLE_SAMPLER = SamplerConfig(target_points=20_000, trials=4)

_VERSIONED_PACKAGES = ("lemnikit", "numpy", "scipy", "opencv-python", "typer")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchPreset:
    n: int
    m: int
    level: float
    sampler: str
    min_q: int = 0


@dataclass
class Presets:
    """Parsed recipes.yaml: sampler and search presets keyed by name."""

    samplers: dict[str, SamplerConfig] = field(default_factory=dict)
    searches: dict[str, SearchPreset] = field(default_factory=dict)

    def sampler(self, name: str) -> SamplerConfig:
        if name not in self.samplers:
            raise KeyError(f"unknown preset '{name}'")
        return self.samplers[name]

    def search(self, name: str) -> SearchPreset:
        if name not in self.searches:
            raise KeyError(f"unknown preset '{name}'")
        return self.searches[name]


def _int_field(path: Path, where: str, raw: dict[str, Any], key: str, default: int | None = None) -> int:
    value = raw.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{path}: {where}.{key} must be an integer, got {value!r}")
    return value


def load_presets(path: Path = DEFAULT_PRESETS) -> Presets:
    """Load recipes.yaml. Raises FileNotFoundError or ValueError on bad input."""
    if not path.exists():
        raise FileNotFoundError(f"{path} not found")

    raw = yaml.safe_load(path.read_text()) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    samplers_raw = raw.get("samplers") or {}
    searches_raw = raw.get("searches") or {}
    if not isinstance(samplers_raw, dict):
        raise ValueError(f"{path}: 'samplers' must be a mapping")
    if not isinstance(searches_raw, dict):
        raise ValueError(f"{path}: 'searches' must be a mapping")

    samplers: dict[str, SamplerConfig] = {}
    for name, entry in samplers_raw.items():
        if not isinstance(entry, dict):
            raise ValueError(f"{path}: sampler '{name}' must be a mapping")
        kind = entry.get("kind", SamplerKind.TRIANGULAR_LATTICE.value)
        if kind not in {k.value for k in SamplerKind}:
            raise ValueError(f"{path}: sampler '{name}' has unknown kind {kind!r}")
        where = f"samplers.{name}"
        samplers[str(name)] = SamplerConfig(
            kind=SamplerKind(kind),
            target_points=_int_field(path, where, entry, "p", 100_000),
            trials=_int_field(path, where, entry, "trials", 20),
            seed=_int_field(path, where, entry, "seed", 0),
        )

    searches: dict[str, SearchPreset] = {}
    for name, entry in searches_raw.items():
        if not isinstance(entry, dict):
            raise ValueError(f"{path}: search '{name}' must be a mapping")
        where = f"searches.{name}"
        sampler = str(entry.get("sampler", ""))
        if sampler not in samplers:
            raise ValueError(f"{path}: search '{name}' refers to unknown sampler '{sampler}'")
        level = entry.get("level", 1.0)
        if not isinstance(level, (int, float)) or isinstance(level, bool) or not level > 0:
            raise ValueError(f"{path}: {where}.level must be a positive number, got {level!r}")
        searches[str(name)] = SearchPreset(
            n=_int_field(path, where, entry, "n"),
            m=_int_field(path, where, entry, "m"),
            level=float(level),
            sampler=sampler,
            min_q=_int_field(path, where, entry, "min_q", 0),
        )

    return Presets(samplers=samplers, searches=searches)


# ---------------------------------------------------------------------------
# Table recipes
# ---------------------------------------------------------------------------

BENCH_CSV_FIELDS = ["n", "closed_form"] + [
    f"{kind.value}_{col}" for kind in SamplerKind for col in ("mean", "error")
]


def bench_samplers(
    n_max: int,
    target_points: int = 100_000,
    trials: int = 6,
    seed: int = 0,
    *,
    threads: int | None = None,
) -> list[dict[str, Any]]:
    """Every sampler against the closed-form area of {|z^n - 1| < 1}, n = 2..n_max."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    rows: list[dict[str, Any]] = []
    for n in range(2, n_max + 1):
        spec = LevelSetSpec(named_family(FamilyKind.ERDOS, n), 1.0)
        exact = erdos_area_closed_form(n)
        row: dict[str, Any] = {"n": n, "closed_form": exact}
        for kind in SamplerKind:
            cfg = SamplerConfig(kind=kind, target_points=target_points, trials=trials, seed=seed)
            est = estimate_area(spec, cfg, threads=threads)
            row[f"{kind.value}_mean"] = est.mean
            row[f"{kind.value}_error"] = est.mean - exact
        logger.info("bench n=%d: closed form %.6f", n, exact)
        rows.append(row)
    return rows


def max_abs_error(rows: list[dict[str, Any]], kind: SamplerKind | str) -> float:
    key = f"{SamplerKind(kind).value}_error"
    return max(abs(row[key]) for row in rows)


@dataclass(frozen=True)
class MinimizerRow:
    n: int
    m: int
    expected_h: int
    found: dict[str, Any]
    area_mean: float
    area_std: float
    matches: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "expected_h": self.expected_h,
            "found": self.found,
            "area_mean": self.area_mean,
            "area_std": self.area_std,
            "matches": self.matches,
        }


def table_minimizers(
    sampler: SamplerConfig = TABLE_SAMPLER,
    level: float = 1.0,
    grids: dict[int, int] | None = None,
    *,
    threads: int | None = None,
) -> list[MinimizerRow]:
    """Scaled-down exhaustive searches compared with C_{n,h} at the expected h."""
    grids = TABLE_GRIDS if grids is None else grids
    rows = []
    for n, m in sorted(grids.items()):
        report = exhaustive_search(SearchSpace(n=n, m=m), level, sampler, threads=threads, confirm=False)
        h = EXPECTED_MINIMIZERS[n]
        matches = equivalent_configurations(report.best, c_nh(n, h), tol=1e-9)
        if not matches:
            logger.warning("n=%d: best configuration differs from C_{%d,%d}", n, n, h)
        rows.append(
            MinimizerRow(
                n=n,
                m=m,
                expected_h=h,
                found=report.best.to_json(),
                area_mean=report.best_area.mean,
                area_std=report.best_area.stddev,
                matches=matches,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Run manifest
# ---------------------------------------------------------------------------

def spec_hash(inputs: dict[str, Any]) -> str:
    """First 12 hex digits of sha256 over the sorted JSON of the inputs."""
    return hashlib.sha256(json.dumps(inputs, sort_keys=True, default=str).encode()).hexdigest()[:12]


def _file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def package_versions() -> dict[str, str]:
    out = {}
    for name in _VERSIONED_PACKAGES:
        try:
            out[name] = version(name)
        except PackageNotFoundError:
            out[name] = "unknown"
    return out


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class RunManifest:
    """What ran, with which inputs, and the hashes of what it wrote.

    Timestamps live only here; the outputs themselves carry none.
    """

    command: list[str]
    seed: int | None
    inputs: dict[str, Any]
    spec_hash: str
    versions: dict[str, str]
    started_at: str
    finished_at: str
    outputs: dict[str, str]

    def to_json(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "inputs": self.inputs,
            "spec_hash": self.spec_hash,
            "versions": self.versions,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": self.outputs,
        }


def build_manifest(
    command: list[str],
    seed: int | None,
    inputs: dict[str, Any],
    outputs: list[Path],
    started_at: str,
) -> RunManifest:
    return RunManifest(
        command=command,
        seed=seed,
        inputs=inputs,
        spec_hash=spec_hash(inputs),
        versions=package_versions(),
        started_at=started_at,
        finished_at=utc_now(),
        outputs={p.name: _file_sha256(p) for p in sorted(outputs)},
    )


def write_manifest(manifest: RunManifest, out_dir: Path) -> Path:
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest.to_json(), indent=2, default=str) + "\n")
    return path


def format_area(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.6f}"
