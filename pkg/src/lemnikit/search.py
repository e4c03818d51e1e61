"""
Searches for small-area root configurations on the unit circle.

  - exhaustive: every candidate of a SearchSpace, common random numbers
  - local: cyclic coordinate descent, one root at a time inside its arc
  - cnh sweep: the merged-petal family C_{n,h}

All candidates in one search share the sampler seed, so the ranking is a
deterministic function of (space, level, seed). Ties on the mean are broken
by the lexicographically smallest sorted angle list (in turns).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from itertools import batched, combinations
from pathlib import Path
from typing import Any

import numpy as np

from lemnikit.constructions import c_nh
from lemnikit.poly import ConstraintTag, LevelSetSpec, RootConfiguration
from lemnikit.sampling import (
    AreaEstimate,
    SamplerConfig,
    estimate_area,
    resolve_threads,
    write_rows_csv,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000
MAX_TIES = 20
TRACE_CSV_FIELDS = ["candidate_id", "angles", "q", "s", "r", "area_mean", "area_std"]
CNH_CSV_FIELDS = ["n", "h", "mean", "stddev"]


class Symmetry(StrEnum):
    CONJUGATE_SYMMETRIC = "conjugate"
    NONE = "none"


@dataclass(frozen=True)
class SearchSpace:
    """Candidate set for the exhaustive search.

    CONJUGATE_SYMMETRIC: q roots at 1, s at -1 and r conjugate pairs drawn
    from the half-circle grid e^{i pi j / m}, 1 <= j < m, with q + s + 2r = n.
    NONE: n-element subsets of the m-th roots of unity.

    min_multiplicity_at_one keeps only candidates with at least that many
    roots at 1 (q >= k), which shrinks the larger searches to the
    merged-root shapes.
    """

    n: int
    m: int
    symmetry: Symmetry = Symmetry.CONJUGATE_SYMMETRIC
    anchor_one: bool = False
    max_multiplicity: int | None = None
    min_multiplicity_at_one: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.symmetry is Symmetry.NONE and self.m < self.n:
            raise ValueError(f"subsets of {self.m} roots of unity cannot have {self.n} elements")
        if self.max_multiplicity is not None and self.max_multiplicity < 1:
            raise ValueError(f"max_multiplicity must be >= 1, got {self.max_multiplicity}")
        k = self.min_multiplicity_at_one
        if not 0 <= k <= self.n:
            raise ValueError(f"min_multiplicity_at_one must lie in [0, {self.n}], got {k}")
        if self.max_multiplicity is not None and k > self.max_multiplicity:
            raise ValueError(f"min_multiplicity_at_one {k} exceeds max_multiplicity {self.max_multiplicity}")
        if self.symmetry is Symmetry.NONE and k > 1:
            raise ValueError("subsets of roots of unity hold at most one root at 1")

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "symmetry": self.symmetry.value,
            "anchor_one": self.anchor_one,
            "max_multiplicity": self.max_multiplicity,
            "min_multiplicity_at_one": self.min_multiplicity_at_one,
            "budget": self.budget,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> SearchSpace:
        return cls(**raw)


def _splits(space: SearchSpace) -> Iterator[tuple[int, int, int]]:
    cap = space.n if space.max_multiplicity is None else space.max_multiplicity
    for r in range(space.n // 2 + 1):
        if r > space.m - 1:
            break
        for q in range(space.n - 2 * r, -1, -1):
            s = space.n - 2 * r - q
            if q > cap or s > cap or q < space.min_multiplicity_at_one or (space.anchor_one and q == 0):
                continue
            yield q, s, r


def candidate_count(space: SearchSpace) -> int:
    if space.symmetry is Symmetry.NONE:
        if space.anchor_one or space.min_multiplicity_at_one == 1:
            return math.comb(space.m - 1, space.n - 1)
        return math.comb(space.m, space.n)
    return sum(math.comb(space.m - 1, r) for _, _, r in _splits(space))


def iter_candidates(space: SearchSpace) -> Iterator[tuple[int, int, int, RootConfiguration]]:
    """Yield (q, s, r, configuration) lazily, in a fixed order."""
    if space.symmetry is Symmetry.NONE:
        if space.anchor_one or space.min_multiplicity_at_one == 1:
            subsets = ((0, *rest) for rest in combinations(range(1, space.m), space.n - 1))
        else:
            subsets = combinations(range(space.m), space.n)
        for ks in subsets:
            config = RootConfiguration.from_angles([k / space.m for k in ks])
            q = int(0 in ks)
            s = int(space.m % 2 == 0 and space.m // 2 in ks)
            yield q, s, space.n - q - s, config
        return

    for q, s, r in _splits(space):
        for js in combinations(range(1, space.m), r):
            turns = [0.0] * q + [0.5] * s
            for j in js:
                turns.extend((j / (2 * space.m), 1.0 - j / (2 * space.m)))
            mults = [1] * len(turns)
            yield q, s, r, RootConfiguration.from_angles(turns, mults)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRow:
    candidate_id: int
    angles: tuple[float, ...]  # sorted, in turns
    q: int
    s: int
    r: int
    area_mean: float
    area_std: float

    @property
    def key(self) -> tuple[float, tuple[float, ...]]:
        return self.area_mean, self.angles

    def to_row(self) -> dict[str, str]:
        return {
            "candidate_id": str(self.candidate_id),
            "angles": " ".join(repr(a) for a in self.angles),
            "q": str(self.q),
            "s": str(self.s),
            "r": str(self.r),
            "area_mean": repr(self.area_mean),
            "area_std": repr(self.area_std),
        }

    @classmethod
    def from_row(cls, row: dict[str, str]) -> TraceRow:
        return cls(
            candidate_id=int(row["candidate_id"]),
            angles=tuple(float(a) for a in row["angles"].split()),
            q=int(row["q"]),
            s=int(row["s"]),
            r=int(row["r"]),
            area_mean=float(row["area_mean"]),
            area_std=float(row["area_std"]),
        )


def angle_key(config: RootConfiguration) -> tuple[float, ...]:
    return tuple((config.angles() / (2 * math.pi)).tolist())


@dataclass(frozen=True)
class SearchReport:
    kind: str
    best: RootConfiguration
    best_area: AreaEstimate
    evaluated: int
    seed: int
    level: float
    ties: tuple[TraceRow, ...] = ()
    trace: tuple[TraceRow, ...] = ()
    space: SearchSpace | None = None
    confirmed_area: AreaEstimate | None = None
    cycles: int | None = None
    trace_file: str | None = field(default=None, compare=False)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "best": self.best.to_json(),
            "best_area": self.best_area.to_dict(),
            "evaluated": self.evaluated,
            "seed": self.seed,
            "level": self.level,
            "ties": [t.to_row() for t in self.ties],
            "space": None if self.space is None else self.space.to_json(),
            "confirmed_area": None if self.confirmed_area is None else self.confirmed_area.to_dict(),
            "cycles": self.cycles,
            "trace_file": self.trace_file,
        }


def argmin_from_trace(rows: list[TraceRow] | tuple[TraceRow, ...]) -> TraceRow:
    if not rows:
        raise ValueError("empty trace")
    return min(rows, key=lambda r: r.key)


def persist_report(report: SearchReport, path: Path) -> Path:
    """Write the report JSON to `path` and its trace CSV next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_path = path.with_name(f"{path.stem}_trace.csv")
    write_rows_csv((row.to_row() for row in report.trace), TRACE_CSV_FIELDS, trace_path)
    payload = report.to_json() | {"trace_file": trace_path.name}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return trace_path


def load_report(path: Path) -> SearchReport:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report file not found: {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    trace: tuple[TraceRow, ...] = ()
    if raw.get("trace_file"):
        trace_path = path.parent / raw["trace_file"]
        if not trace_path.exists():
            raise FileNotFoundError(f"Trace file not found: {trace_path}")
        with open(trace_path, newline="", encoding="utf-8") as f:
            trace = tuple(TraceRow.from_row(row) for row in csv.DictReader(f))
    confirmed = raw.get("confirmed_area")
    space = raw.get("space")
    return SearchReport(
        kind=raw["kind"],
        best=RootConfiguration.from_json(raw["best"]),
        best_area=AreaEstimate.from_dict(raw["best_area"]),
        evaluated=int(raw["evaluated"]),
        seed=int(raw["seed"]),
        level=float(raw["level"]),
        ties=tuple(TraceRow.from_row(t) for t in raw.get("ties", [])),
        trace=trace,
        space=None if space is None else SearchSpace.from_json(space),
        confirmed_area=None if confirmed is None else AreaEstimate.from_dict(confirmed),
        cycles=raw.get("cycles"),
        trace_file=raw.get("trace_file"),
    )


# ---------------------------------------------------------------------------
# Exhaustive search
# ---------------------------------------------------------------------------

def _confirm(config: RootConfiguration, level: float, sampler: SamplerConfig, threads: int | None) -> AreaEstimate:
    fresh = dataclasses.replace(
        sampler, target_points=10 * sampler.target_points, seed=sampler.seed + 1
    )
    return estimate_area(LevelSetSpec(config, level), fresh, threads=threads)


def exhaustive_search(
    space: SearchSpace,
    level: float,
    sampler: SamplerConfig,
    *,
    threads: int | None = None,
    confirm: bool = True,
) -> SearchReport:
    total = candidate_count(space)
    if total > space.budget:
        raise ValueError(f"search space has {total} candidates, budget is {space.budget}")
    if total == 0:
        raise ValueError(f"search space n={space.n}, m={space.m} has no candidates")
    workers = resolve_threads(threads)
    logger.info(
        "Exhaustive search n=%d m=%d symmetry=%s: %d candidates, %d workers",
        space.n, space.m, space.symmetry.value, total, workers,
    )

    def evaluate(item: tuple[int, tuple[int, int, int, RootConfiguration]]) -> tuple[TraceRow, AreaEstimate]:
        idx, (q, s, r, config) = item
        est = estimate_area(LevelSetSpec(config, level), sampler, threads=1)
        return TraceRow(idx, angle_key(config), q, s, r, est.mean, est.stddev), est

    trace: list[TraceRow] = []
    best_config: RootConfiguration | None = None
    best_area: AreaEstimate | None = None
    best: TraceRow | None = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for chunk in batched(enumerate(iter_candidates(space)), max(8 * workers, 1)):
            for (_, (_, _, _, config)), (row, est) in zip(chunk, pool.map(evaluate, chunk), strict=True):
                trace.append(row)
                if best is None or row.key < best.key:
                    best = row
                    best_config, best_area = config, est

    ties = sorted(
        (
            row for row in trace
            if row is not best
            and abs(row.area_mean - best.area_mean) <= math.hypot(row.area_std, best.area_std)
        ),
        key=lambda r: r.key,
    )[:MAX_TIES]
    confirmed = _confirm(best_config, level, sampler, threads) if confirm else None
    logger.info("Exhaustive search done: best area %.6f (%d near-ties)", best.area_mean, len(ties))
    return SearchReport(
        kind="exhaustive",
        best=best_config,
        best_area=best_area,
        evaluated=len(trace),
        seed=sampler.seed,
        level=level,
        ties=tuple(ties),
        trace=tuple(trace),
        space=space,
        confirmed_area=confirmed,
    )


# ---------------------------------------------------------------------------
# Local search
# ---------------------------------------------------------------------------

def local_search(
    initial: RootConfiguration,
    level: float,
    sampler: SamplerConfig,
    arc_discretization: int = 16,
    *,
    max_cycles: int = 50,
    threads: int | None = None,
) -> SearchReport:
    """Cyclic coordinate descent with z_0 pinned at 1.

    Root k moves to the best of arc_discretization equispaced positions on
    the arc between its neighbours (endpoints included), and only when that
    strictly lowers the area. Stops after a full cycle without a move;
    `cycles` counts that final cycle too.
    """
    if initial.tag is not ConstraintTag.UNIT_CIRCLE:
        raise ValueError("local search needs a UNIT_CIRCLE configuration")
    if arc_discretization < 2:
        raise ValueError(f"arc_discretization must be >= 2, got {arc_discretization}")
    theta = initial.angles()
    theta = np.sort(np.mod(theta - theta[0], 2 * math.pi))
    n = theta.size
    workers = resolve_threads(threads)

    def config_of(angles: np.ndarray) -> RootConfiguration:
        return RootConfiguration.from_angles([0.0] + (angles[1:] / (2 * math.pi)).tolist())

    def area_of(angles: np.ndarray) -> AreaEstimate:
        return estimate_area(LevelSetSpec(config_of(angles), level), sampler, threads=1)

    current = area_of(theta)
    trace = [TraceRow(0, angle_key(config_of(theta)), 0, 0, 0, current.mean, current.stddev)]
    cycles = 0
    moved = False
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while cycles < max_cycles:
            cycles += 1
            moved = False
            for k in range(1, n):
                left = theta[k - 1]
                right = theta[k + 1] if k + 1 < n else 2 * math.pi
                positions = np.linspace(left, right, arc_discretization)
                if right >= 2 * math.pi:
                    positions = positions[positions < 2 * math.pi]
                trials = []
                for pos in positions:
                    cand = theta.copy()
                    cand[k] = pos
                    trials.append(cand)
                estimates = list(pool.map(area_of, trials))
                choice = min(
                    range(len(trials)),
                    key=lambda i: (estimates[i].mean, angle_key(config_of(trials[i]))),
                )
                if estimates[choice].mean < current.mean:
                    theta = trials[choice]
                    current = estimates[choice]
                    moved = True
                    trace.append(
                        TraceRow(len(trace), angle_key(config_of(theta)), 0, 0, 0, current.mean, current.stddev)
                    )
            if not moved:
                break
    if moved:
        logger.warning("Local search stopped at the cycle limit (%d)", max_cycles)
    logger.info("Local search finished after %d cycles: area %.6f", cycles, current.mean)
    return SearchReport(
        kind="local",
        best=config_of(theta),
        best_area=current,
        evaluated=len(trace),
        seed=sampler.seed,
        level=level,
        trace=tuple(trace),
        cycles=cycles,
    )


# ---------------------------------------------------------------------------
# C_{n,h} sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CnhRow:
    n: int
    h: int
    mean: float
    stddev: float

    def to_row(self) -> dict[str, str]:
        return {"n": str(self.n), "h": str(self.h), "mean": repr(self.mean), "stddev": repr(self.stddev)}


@dataclass(frozen=True)
class CnhTable:
    level: float
    rows: tuple[CnhRow, ...]

    @property
    def argmin(self) -> dict[int, int]:
        """Best h per n; ties go to the smaller h."""
        best: dict[int, CnhRow] = {}
        for row in self.rows:
            if row.n not in best or row.mean < best[row.n].mean:
                best[row.n] = row
        return {n: row.h for n, row in sorted(best.items())}

    @property
    def floor(self) -> float:
        """Smallest area over h < n (all of C_{n,h} with h = n is one merged root)."""
        proper = [row.mean for row in self.rows if row.h < row.n]
        return min(proper) if proper else math.nan

    def matrix(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for row in self.rows:
            out.setdefault(row.n, []).append(row.mean)
        return out


def cnh_sweep(
    n_values: list[int] | range,
    level: float,
    sampler: SamplerConfig,
    *,
    threads: int | None = None,
) -> CnhTable:
    pairs = [(n, h) for n in n_values for h in range(1, n + 1)]
    workers = resolve_threads(threads)
    logger.info("C_{n,h} sweep over %d configurations at level %s", len(pairs), level)

    def evaluate(pair: tuple[int, int]) -> CnhRow:
        n, h = pair
        est = estimate_area(LevelSetSpec(c_nh(n, h), level), sampler, threads=1)
        return CnhRow(n, h, est.mean, est.stddev)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = tuple(pool.map(evaluate, pairs))
    return CnhTable(level=level, rows=rows)


def write_cnh_csv(table: CnhTable, path: Path) -> int:
    return write_rows_csv((row.to_row() for row in table.rows), CNH_CSV_FIELDS, path)


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

def _matches(p: np.ndarray, q: np.ndarray, tol: float) -> bool:
    used = np.zeros(q.size, dtype=bool)
    for z in p:
        free = np.nonzero(~used & (np.abs(q - z) <= tol))[0]
        if free.size == 0:
            return False
        used[free[0]] = True
    return True


def equivalent_configurations(
    a: RootConfiguration,
    b: RootConfiguration,
    tol: float = 1e-9,
    *,
    allow_reflection: bool = True,
) -> bool:
    """Equal as root multisets up to a rotation (and conjugation if allowed)."""
    if a.degree != b.degree:
        return False
    pa = np.repeat(a.locations, a.multiplicities)
    pb = np.repeat(b.locations, b.multiplicities)
    if not np.allclose(np.sort(np.abs(pa)), np.sort(np.abs(pb)), atol=tol, rtol=0.0):
        return False
    variants = [pa, np.conj(pa)] if allow_reflection else [pa]
    for p in variants:
        anchor = p[np.argmax(np.abs(p))]
        if abs(anchor) == 0.0:
            return _matches(p, pb, tol)
        for target in pb:
            if abs(abs(target) - abs(anchor)) > tol:
                continue
            omega = target / anchor
            omega /= abs(omega)
            if _matches(p * omega, pb, tol):
                return True
    return False

