"""
Monte Carlo area of lemniscates.

Each trial samples the disc of radius r around the origin with about p
points and reports (pi r^2) * hits / points. Samplers:

  - square lattice, randomly shifted and rotated
  - triangular lattice Z + Z e^{2 pi i / 3}, randomly shifted and rotated
  - i.i.d. uniform points in the disc

Trial randomness comes from SeedSequence(seed, spawn_key=(trial,)), so any
trial can be reproduced on its own and trials can run in any order.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from functools import partial
from pathlib import Path
from typing import Any

import numpy as np

from lemnikit.poly import ConstraintTag, LevelSetSpec, log_abs_eval

logger = logging.getLogger(__name__)

THREADS_ENV = "LEMNIKIT_THREADS"
MIN_RADIUS = 1.05
CHUNK_POINTS = 1 << 16

AREA_CSV_FIELDS = ["spec_id", "kind", "p", "T", "seed", "radius", "mean", "stddev"]


class SamplerKind(StrEnum):
    SQUARE_LATTICE = "square"
    TRIANGULAR_LATTICE = "triangular"
    UNIFORM_RANDOM = "uniform"


@dataclass(frozen=True)
class SamplerConfig:
    kind: SamplerKind = SamplerKind.TRIANGULAR_LATTICE
    target_points: int = 100_000
    trials: int = 20
    seed: int = 0
    bounding_radius_override: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SamplerKind(self.kind))
        if self.target_points < 100:
            raise ValueError(f"target_points must be >= 100, got {self.target_points}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        override = self.bounding_radius_override
        if override is not None and not (math.isfinite(override) and override > 0):
            raise ValueError(f"bounding_radius_override must be positive, got {override!r}")


@dataclass(frozen=True)
class AreaEstimate:
    mean: float
    stddev: float
    trials: int
    points_per_trial: int
    bounding_radius: float
    seed: int
    kind: SamplerKind = SamplerKind.TRIANGULAR_LATTICE
    per_trial: tuple[float, ...] = field(default=())

    @property
    def standard_error(self) -> float:
        return self.stddev / math.sqrt(self.trials)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "trials": self.trials,
            "points_per_trial": self.points_per_trial,
            "bounding_radius": self.bounding_radius,
            "seed": self.seed,
            "kind": self.kind.value,
            "per_trial": list(self.per_trial),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> AreaEstimate:
        return cls(
            mean=float(raw["mean"]),
            stddev=float(raw["stddev"]),
            trials=int(raw["trials"]),
            points_per_trial=int(raw["points_per_trial"]),
            bounding_radius=float(raw["bounding_radius"]),
            seed=int(raw["seed"]),
            kind=SamplerKind(raw.get("kind", SamplerKind.TRIANGULAR_LATTICE)),
            per_trial=tuple(float(a) for a in raw.get("per_trial", ())),
        )


def combined_stddev(*estimates: AreaEstimate) -> float:
    return math.sqrt(sum(e.stddev ** 2 for e in estimates))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def resolve_threads(explicit: int | None = None) -> int:
    """Worker count: explicit value, else $LEMNIKIT_THREADS, else all cores."""
    if explicit is not None:
        if explicit < 1:
            raise ValueError(f"threads must be >= 1, got {explicit}")
        return explicit
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def bounding_radius(spec: LevelSetSpec, override: float | None = None) -> float:
    """Radius r with the lemniscate inside the disc r*D.

    For zeros in the closed disc, |p(z)| >= (|z| - 1)^n, which gives
    r = 1 + t^(1/n). Untagged configurations need an explicit override.
    """
    if override is not None:
        return float(override)
    if spec.config.tag is ConstraintTag.NONE:
        raise ValueError(
            "bounding radius needs a UNIT_DISC or UNIT_CIRCLE configuration; "
            "pass bounding_radius_override for untagged roots"
        )
    return max(1.0 + spec.level ** (1.0 / spec.degree), MIN_RADIUS)


def enclosing_radius(spec: LevelSetSpec) -> float:
    """Sound radius for any configuration: max|w| + t^(1/n)."""
    reach = float(np.abs(spec.config.locations).max())
    return max(reach + spec.level ** (1.0 / spec.degree), MIN_RADIUS)


def sampler_for(spec: LevelSetSpec, cfg: SamplerConfig) -> SamplerConfig:
    """cfg, with the enclosing radius filled in for untagged configurations."""
    if spec.config.tag is ConstraintTag.NONE and cfg.bounding_radius_override is None:
        return dataclasses.replace(cfg, bounding_radius_override=enclosing_radius(spec))
    return cfg


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=(trial_index,))
    return np.random.default_rng(sequence)


def lattice_points(cfg: SamplerConfig, radius: float, trial_index: int) -> np.ndarray:
    """Sample points of one trial inside the open disc of the given radius."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    rng = trial_rng(cfg.seed, trial_index)
    p = cfg.target_points

    if cfg.kind is SamplerKind.UNIFORM_RANDOM:
        u = rng.random(p)
        v = rng.random(p)
        return radius * np.sqrt(u) * np.exp(2j * np.pi * v)

    shift = rng.random(2)
    phase = np.exp(2j * np.pi * rng.random())
    if cfg.kind is SamplerKind.SQUARE_LATTICE:
        second = 1j
    else:
        second = complex(-0.5, math.sqrt(3) / 2)
    # |Im(second)| is both the unit cell area and the sine of the basis angle
    cell = abs(second.imag)
    spacing = radius * math.sqrt(math.pi / (cell * p))
    reach = math.ceil(radius / (spacing * cell)) + 1
    idx = np.arange(-reach, reach + 1, dtype=np.float64)
    i, j = np.meshgrid(idx + shift[0], idx + shift[1], indexing="ij")
    pts = spacing * (i.ravel() + j.ravel() * second) * phase
    return pts[np.abs(pts) < radius]


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def _hits(spec: LevelSetSpec, inside_disc: bool, pts: np.ndarray) -> int:
    inside = log_abs_eval(spec.config, pts) < spec.log_level
    if inside_disc:
        inside &= np.abs(pts) <= 1.0
    return int(np.count_nonzero(inside))


def _chunks(pts: np.ndarray) -> list[np.ndarray]:
    return [pts[i : i + CHUNK_POINTS] for i in range(0, pts.size, CHUNK_POINTS)]


def _estimate(
    spec: LevelSetSpec, cfg: SamplerConfig, threads: int | None, inside_disc: bool
) -> AreaEstimate:
    radius = bounding_radius(spec, cfg.bounding_radius_override)
    workers = resolve_threads(threads)
    make = partial(lattice_points, cfg, radius)
    count = partial(_hits, spec, inside_disc)

    hits: list[int] = []
    sizes: list[int] = []
    if workers == 1:
        for k in range(cfg.trials):
            pts = make(k)
            hits.append(sum(count(c) for c in _chunks(pts)))
            sizes.append(int(pts.size))
    else:
        # a batch of `workers` trials at a time bounds memory at workers * p points
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for start in range(0, cfg.trials, workers):
                batch = list(pool.map(make, range(start, min(start + workers, cfg.trials))))
                chunked = [_chunks(pts) for pts in batch]
                counts = list(pool.map(count, [c for chunks in chunked for c in chunks]))
                pos = 0
                for pts, chunks in zip(batch, chunked, strict=True):
                    hits.append(sum(counts[pos : pos + len(chunks)]))
                    sizes.append(int(pts.size))
                    pos += len(chunks)

    areas = np.array(
        [math.pi * radius * radius * h / size for h, size in zip(hits, sizes, strict=True)],
        dtype=np.float64,
    )
    stddev = float(areas.std(ddof=1)) if cfg.trials > 1 else 0.0
    return AreaEstimate(
        mean=float(areas.mean()),
        stddev=stddev,
        trials=cfg.trials,
        points_per_trial=round(sum(sizes) / len(sizes)),
        bounding_radius=radius,
        seed=cfg.seed,
        kind=cfg.kind,
        per_trial=tuple(float(a) for a in areas),
    )


def estimate_area(
    spec: LevelSetSpec, cfg: SamplerConfig, *, threads: int | None = None
) -> AreaEstimate:
    """Mean and sample stddev of the per-trial area over cfg.trials trials."""
    return _estimate(spec, cfg, threads, inside_disc=False)


def estimate_area_inside_disc(
    spec: LevelSetSpec, cfg: SamplerConfig, *, threads: int | None = None
) -> AreaEstimate:
    """Area of the lemniscate intersected with the closed unit disc."""
    return _estimate(spec, cfg, threads, inside_disc=True)


def erdos_area_closed_form(n: int) -> float:
    """Area of {|z^n - 1| < 1}."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return (
        2.0 ** (2.0 / n)
        * math.sqrt(math.pi)
        * math.gamma(0.5 + 1.0 / n)
        / (2.0 * math.gamma(1.0 + 1.0 / n))
    )


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def area_row(spec_id: str, estimate: AreaEstimate, cfg: SamplerConfig) -> dict[str, str]:
    return {
        "spec_id": spec_id,
        "kind": cfg.kind.value,
        "p": str(cfg.target_points),
        "T": str(cfg.trials),
        "seed": str(cfg.seed),
        "radius": repr(estimate.bounding_radius),
        "mean": repr(estimate.mean),
        "stddev": repr(estimate.stddev),
    }


def write_rows_csv(rows: Iterable[dict[str, Any]], fields: list[str], output_path: Path) -> int:
    """Write rows to CSV and return the number of rows written."""
    count = 0
    with open(output_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def write_area_csv(rows: Iterable[dict[str, str]], output_path: Path) -> int:
    return write_rows_csv(rows, AREA_CSV_FIELDS, output_path)
