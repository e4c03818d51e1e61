"""
lemnikit: numerical laboratory for polynomial lemniscates.

Usage:
    lemnikit area --family erdos --n 3 --t 1         # Monte Carlo area
    lemnikit bench-samplers --n-max 10                # samplers vs closed form
    lemnikit table-minimizers                         # small exhaustive searches
    lemnikit verify inradius --family erdos --n 8     # one inequality check
    lemnikit contour --family erdos --n 5 --t 0.5     # boundary as SVG
    lemnikit construct wagner --R 1.2                 # small-area circle polynomial
    lemnikit construct push --eps 0.3 --random-degree 10 --seed 7
    lemnikit search exhaustive --n 4 --m 24
    lemnikit search local --roots '{"angles_over_2pi":[0,0,0.5]}'
    lemnikit search cnh --n-max 8

Every command writes its outputs and a manifest.json into --out
(default runs/<command>-<hash of the inputs>).
"""

import dataclasses
import json
import logging
import os
import re
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import sentry_sdk
import typer
from dotenv import load_dotenv

from . import recipes
from .constructions import (
    FamilyKind,
    WagnerParams,
    c_nh,
    named_family,
    push_zeros_deterministic,
    push_zeros_probabilistic,
    random_configuration,
    wagner_polynomial,
)
from .geometry import contour_loops, contours_to_svg, default_window_radius
from .poly import ConstraintTag, LevelSetSpec, RootConfiguration, dumps_config, loads_config
from .sampling import (
    SamplerConfig,
    SamplerKind,
    area_row,
    estimate_area,
    sampler_for,
    write_area_csv,
    write_rows_csv,
)
from .search import (
    SearchSpace,
    Symmetry,
    cnh_sweep,
    exhaustive_search,
    local_search,
    persist_report,
    write_cnh_csv,
)
from .verify import (
    CheckReport,
    verify_area_inradius_perimeter,
    verify_arc_lengths,
    verify_crane,
    verify_disconnected_area,
    verify_discretization,
    verify_inradius_area,
    verify_inside_outside,
    verify_perimeter_area,
    verify_pushing,
    verify_reflection,
    verify_sign_changes,
    verify_wagner,
)

logger = logging.getLogger(__name__)

DEFAULT_RUNS_DIR = Path("runs")
CNH_FAMILY = "cnh"
CHECKS = (
    "inradius",
    "perimeter",
    "area-inradius-perimeter",
    "disconnected",
    "inside-outside",
    "crane",
    "reflection",
    "sign-changes",
    "arcs",
    "pushing",
    "wagner",
    "discretization",
)
_INNER_RE = re.compile(r"^\s*z\s*(?:\^\s*(\d+))?\s*$")

app = typer.Typer(help="Numerical laboratory for polynomial lemniscates.")
construct_app = typer.Typer(help="Build configurations: Wagner polynomial, zero-pushing, named families.")
search_app = typer.Typer(help="Search for small-area configurations on the unit circle.")
app.add_typer(construct_app, name="construct")
app.add_typer(search_app, name="search")


@app.callback()
def _startup() -> None:
    """Initialize logging and Sentry before any subcommand runs."""
    load_dotenv()
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    sentry_dsn = os.environ.get("SENTRY_DSN")
    if sentry_dsn:
        sentry_sdk.init(
            dsn=sentry_dsn,
            traces_sample_rate=1.0,
            environment=os.environ.get("SENTRY_ENVIRONMENT", "production"),
        )


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

@contextmanager
def _handled(command: str) -> Iterator[None]:
    """Turn library errors into exit code 2 with a one-line message."""
    try:
        yield
    except typer.Exit:
        raise
    except (ValueError, KeyError, FileNotFoundError, OverflowError, RuntimeError) as e:
        logger.error("%s failed: %s", command, e)
        sentry_sdk.capture_exception(e)
        typer.echo(f"ERROR: {e}")
        raise typer.Exit(2)


def _resolve_config(
    family: str | None,
    n: int | None,
    h: int | None,
    roots: str | None,
    roots_file: Path | None,
    random_degree: int | None,
    seed: int,
) -> RootConfiguration:
    given = [x for x in (family, roots, roots_file, random_degree) if x is not None]
    if len(given) != 1:
        raise ValueError("give exactly one of --family, --roots, --roots-file, --random-degree")
    if roots is not None:
        return loads_config(roots)
    if roots_file is not None:
        if not roots_file.exists():
            raise FileNotFoundError(f"{roots_file} not found")
        return loads_config(roots_file.read_text())
    if random_degree is not None:
        return random_configuration(random_degree, seed)
    if n is None:
        raise ValueError(f"--family {family} needs --n")
    if family == CNH_FAMILY:
        if h is None:
            raise ValueError("--family cnh needs --h")
        return c_nh(n, h)
    return named_family(FamilyKind(family), n)


def _resolve_sampler(
    preset: str | None,
    presets_path: Path,
    kind: str | None,
    p: int | None,
    trials: int | None,
    seed: int | None,
) -> SamplerConfig:
    base = recipes.load_presets(presets_path).sampler(preset) if preset else SamplerConfig()
    overrides: dict[str, Any] = {}
    if kind is not None:
        overrides["kind"] = SamplerKind(kind)
    if p is not None:
        overrides["target_points"] = p
    if trials is not None:
        overrides["trials"] = trials
    if seed is not None:
        overrides["seed"] = seed
    return dataclasses.replace(base, **overrides)


def _sampler_json(cfg: SamplerConfig) -> dict[str, Any]:
    return {"kind": cfg.kind.value, "p": cfg.target_points, "trials": cfg.trials, "seed": cfg.seed}


def _parse_inner(text: str) -> RootConfiguration:
    """'z', 'z^2', 'z^3', ... as the configuration of q(z) = z^d."""
    match = _INNER_RE.match(text)
    if match is None:
        raise ValueError(f"--inner must look like 'z^d', got {text!r}")
    d = int(match.group(1) or 1)
    if d < 1:
        raise ValueError(f"--inner degree must be >= 1, got {d}")
    return RootConfiguration(((0j, d),), tag=ConstraintTag.UNIT_DISC)


def _run_dir(command: str, inputs: dict[str, Any], out: Path | None) -> Path:
    """Return and create the output directory for a run."""
    d = out if out else DEFAULT_RUNS_DIR / f"{command}-{recipes.spec_hash({'command': command} | inputs)}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, payload: Any) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _finish(
    command: str,
    out_dir: Path,
    inputs: dict[str, Any],
    seed: int | None,
    outputs: list[Path],
    started_at: str,
) -> None:
    manifest = recipes.build_manifest(
        ["lemnikit", *sys.argv[1:]], seed, {"command": command} | inputs, outputs, started_at
    )
    recipes.write_manifest(manifest, out_dir)
    typer.echo(f"Wrote {out_dir}")


# ---------------------------------------------------------------------------
# area
# ---------------------------------------------------------------------------

@app.command("area")
def cmd_area(
    family: str | None = typer.Option(None, "--family", help="erdos, erdos-deflated, stretched or cnh"),
    n: int | None = typer.Option(None, "--n", help="Degree for --family"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    roots: str | None = typer.Option(None, "--roots", help="Configuration JSON"),
    roots_file: Path | None = typer.Option(None, "--roots-file", help="Configuration JSON file"),
    random_degree: int | None = typer.Option(None, "--random-degree", help="Seeded random roots in the disc"),
    t: float = typer.Option(1.0, "--t", help="Level t of {|p| < t}"),
    kind: str | None = typer.Option(None, "--kind", help="square, triangular or uniform"),
    p: int | None = typer.Option(None, "--p", help="Points per trial"),
    trials: int | None = typer.Option(None, "--trials", help="Number of trials"),
    seed: int | None = typer.Option(None, "--seed", help="Sampler seed"),
    preset: str | None = typer.Option(None, "--preset", help="Sampler preset from recipes.yaml"),
    presets_path: Path = typer.Option(recipes.DEFAULT_PRESETS, "--presets", help="Path to recipes.yaml"),
    spec_id: str = typer.Option("spec", "--spec-id", help="Label written to the CSV row"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Estimate the area of a lemniscate."""
    started = recipes.utc_now()
    with _handled("area"):
        sampler = _resolve_sampler(preset, presets_path, kind, p, trials, seed)
        config = _resolve_config(family, n, h, roots, roots_file, random_degree, sampler.seed)
        spec = LevelSetSpec(config, t)
        inputs = {"config": config.to_json(), "t": t, "sampler": _sampler_json(sampler), "spec_id": spec_id}
        est = estimate_area(spec, sampler_for(spec, sampler), threads=threads)

        out_dir = _run_dir("area", inputs, out)
        csv_path = out_dir / "area.csv"
        write_area_csv([area_row(spec_id, est, sampler)], csv_path)
        json_path = _write_json(out_dir / "area.json", est.to_dict())
        typer.echo(
            f"area = {est.mean:.6f} +- {est.stddev:.6f}  "
            f"({est.trials} trials, ~{est.points_per_trial} points, radius {est.bounding_radius:.4f})"
        )
        _finish("area", out_dir, inputs, sampler.seed, [csv_path, json_path], started)


# ---------------------------------------------------------------------------
# Table recipes
# ---------------------------------------------------------------------------

@app.command("bench-samplers")
def cmd_bench_samplers(
    n_max: int = typer.Option(10, "--n-max", help="Largest n of {|z^n - 1| < 1}"),
    p: int = typer.Option(100_000, "--p", help="Points per trial"),
    trials: int = typer.Option(6, "--trials", help="Number of trials"),
    seed: int = typer.Option(0, "--seed", help="Sampler seed"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Compare the samplers against the closed-form area of z^n - 1."""
    started = recipes.utc_now()
    with _handled("bench-samplers"):
        inputs = {"n_max": n_max, "p": p, "trials": trials, "seed": seed}
        rows = recipes.bench_samplers(n_max, p, trials, seed, threads=threads)
        out_dir = _run_dir("bench-samplers", inputs, out)
        csv_path = out_dir / "bench.csv"
        write_rows_csv(
            ({k: repr(v) if isinstance(v, float) else str(v) for k, v in row.items()} for row in rows),
            recipes.BENCH_CSV_FIELDS,
            csv_path,
        )
        typer.echo(f"{'n':>3}  {'R(n)':>9}  " + "  ".join(f"{k.value:>11}" for k in SamplerKind))
        for row in rows:
            errors = "  ".join(f"{row[f'{k.value}_error']:>+11.6f}" for k in SamplerKind)
            typer.echo(f"{row['n']:>3}  {row['closed_form']:>9.5f}  {errors}")
        for k in SamplerKind:
            typer.echo(f"max |error| {k.value}: {recipes.max_abs_error(rows, k):.6f}")
        _finish("bench-samplers", out_dir, inputs, seed, [csv_path], started)


@app.command("table-minimizers")
def cmd_table_minimizers(
    p: int = typer.Option(20_000, "--p", help="Points per trial"),
    trials: int = typer.Option(4, "--trials", help="Number of trials"),
    seed: int = typer.Option(0, "--seed", help="Sampler seed"),
    t: float = typer.Option(1.0, "--t", help="Level"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Run the small exhaustive searches for n = 3..6 and compare with C_{n,h}."""
    started = recipes.utc_now()
    with _handled("table-minimizers"):
        sampler = SamplerConfig(target_points=p, trials=trials, seed=seed)
        inputs = {"sampler": _sampler_json(sampler), "t": t, "grids": recipes.TABLE_GRIDS}
        rows = recipes.table_minimizers(sampler, t, threads=threads)
        out_dir = _run_dir("table-minimizers", inputs, out)
        json_path = _write_json(out_dir / "minimizers.json", [row.to_json() for row in rows])
        for row in rows:
            status = "match" if row.matches else "DIFFERS"
            typer.echo(
                f"n={row.n} m={row.m}  expected C_{{{row.n},{row.expected_h}}}  "
                f"area {row.area_mean:.6f} +- {row.area_std:.6f}  {status}"
            )
        _finish("table-minimizers", out_dir, inputs, seed, [json_path], started)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

@app.command("verify")
def cmd_verify(
    check: str = typer.Argument(..., help=f"One of: {', '.join(CHECKS)}"),
    family: str | None = typer.Option(
        None, "--family", "--outer-family", help="erdos, erdos-deflated, stretched or cnh"
    ),
    n: int | None = typer.Option(None, "--n", help="Degree for --family"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    roots: str | None = typer.Option(None, "--roots", help="Configuration JSON"),
    roots_file: Path | None = typer.Option(None, "--roots-file", help="Configuration JSON file"),
    random_degree: int | None = typer.Option(None, "--random-degree", help="Seeded random roots in the disc"),
    t: float = typer.Option(1.0, "--t", help="Level"),
    inner: str = typer.Option("z^2", "--inner", help="Inner polynomial z^d for the crane check"),
    eps: float = typer.Option(0.3, "--eps", help="Pushing radius 1 - eps"),
    R: float = typer.Option(1.2, "--R", help="Generator parameter for wagner/discretization"),
    resolution: int | None = typer.Option(None, "--resolution", help="Grid resolution for metric checks"),
    samples: int = typer.Option(100_000, "--samples", help="Samples for the reflection check"),
    circles: int = typer.Option(100, "--circles", help="Random circles for the sign-change check"),
    grid: int = typer.Option(200, "--grid", help="Test grid for the pushing check"),
    kind: str | None = typer.Option(None, "--kind", help="square, triangular or uniform"),
    p: int | None = typer.Option(None, "--p", help="Points per trial"),
    trials: int | None = typer.Option(None, "--trials", help="Number of trials"),
    seed: int | None = typer.Option(None, "--seed", help="Seed for samplers and random configurations"),
    preset: str | None = typer.Option(None, "--preset", help="Sampler preset from recipes.yaml"),
    presets_path: Path = typer.Option(recipes.DEFAULT_PRESETS, "--presets", help="Path to recipes.yaml"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Run one inequality check. Exit code 1 with a JSON failure list when it fails."""
    started = recipes.utc_now()
    if check not in CHECKS:
        typer.echo(f"ERROR: unknown check '{check}'. Choose from: {', '.join(CHECKS)}")
        raise typer.Exit(2)

    with _handled("verify"):
        if p is None and trials is None and preset is None:
            trials = 6
        sampler = _resolve_sampler(preset, presets_path, kind, p, trials, seed)
        run_seed = sampler.seed
        inputs: dict[str, Any] = {"check": check, "t": t, "sampler": _sampler_json(sampler)}

        def config() -> RootConfiguration:
            cfg = _resolve_config(family, n, h, roots, roots_file, random_degree, run_seed)
            inputs["config"] = cfg.to_json()
            return cfg

        report: CheckReport
        if check == "wagner":
            inputs["R"] = R
            report = verify_wagner(WagnerParams(R=R))
        elif check == "discretization":
            inputs["R"] = R
            report = verify_discretization(wagner_polynomial(WagnerParams(R=R)), seed=run_seed)
        elif check == "sign-changes" and random_degree is not None:
            inputs |= {"random_degree": random_degree, "circles": circles}
            report = verify_sign_changes(random_degree, t, circles, run_seed)
        elif check == "crane":
            inputs["inner"] = inner
            report = verify_crane(_parse_inner(inner), config(), t, sampler, threads=threads)
        else:
            spec = LevelSetSpec(config(), t)
            if resolution is not None:
                inputs["resolution"] = resolution
            if check == "inradius":
                report = verify_inradius_area(spec, resolution or 512, sampler, threads=threads)
            elif check == "perimeter":
                report = verify_perimeter_area(spec, resolution or 2048, sampler, threads=threads)
            elif check == "area-inradius-perimeter":
                report = verify_area_inradius_perimeter(spec, resolution or 1024, sampler, threads=threads)
            elif check == "disconnected":
                report = verify_disconnected_area(spec, resolution or 1024, sampler, threads=threads)
            elif check == "inside-outside":
                report = verify_inside_outside(spec, sampler, threads=threads)
            elif check == "reflection":
                inputs["samples"] = samples
                report = verify_reflection(spec.config, samples, run_seed)
            elif check == "sign-changes":
                inputs["circles"] = circles
                report = verify_sign_changes(spec.degree, t, circles, run_seed, config=spec.config)
            elif check == "arcs":
                report = verify_arc_lengths(spec)
            else:
                inputs |= {"eps": eps, "grid": grid}
                report = verify_pushing(spec.config, eps, grid)

        out_dir = _run_dir("verify", inputs, out)
        json_path = _write_json(out_dir / "report.json", report.to_json())
        _finish("verify", out_dir, inputs, run_seed, [json_path], started)

    status = "pass" if report.passed else "FAIL"
    typer.echo(f"{check}: lhs={report.lhs:.6g} rhs={report.rhs:.6g} margin={report.margin:.3g}  {status}")
    if not report.passed:
        typer.echo(json.dumps({"failures": [report.to_json()]}, indent=2, default=str))
        raise typer.Exit(1)


# ---------------------------------------------------------------------------
# contour
# ---------------------------------------------------------------------------

@app.command("contour")
def cmd_contour(
    family: str | None = typer.Option(None, "--family", help="erdos, erdos-deflated, stretched or cnh"),
    n: int | None = typer.Option(None, "--n", help="Degree for --family"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    roots: str | None = typer.Option(None, "--roots", help="Configuration JSON"),
    roots_file: Path | None = typer.Option(None, "--roots-file", help="Configuration JSON file"),
    random_degree: int | None = typer.Option(None, "--random-degree", help="Seeded random roots in the disc"),
    seed: int = typer.Option(0, "--seed", help="Seed for --random-degree"),
    t: float = typer.Option(1.0, "--t", help="Level"),
    resolution: int = typer.Option(1024, "--resolution", help="Marching-squares grid size"),
    size: int = typer.Option(800, "--size", help="SVG width and height in pixels"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Write the boundary curves of a lemniscate as SVG paths."""
    started = recipes.utc_now()
    with _handled("contour"):
        config = _resolve_config(family, n, h, roots, roots_file, random_degree, seed)
        spec = LevelSetSpec(config, t)
        inputs = {"config": config.to_json(), "t": t, "resolution": resolution, "size": size}
        loops = contour_loops(spec, resolution, threads=threads)
        svg = contours_to_svg(loops, default_window_radius(spec), size)
        out_dir = _run_dir("contour", inputs, out)
        svg_path = out_dir / "contour.svg"
        svg_path.write_text(svg)
        typer.echo(f"{len(loops)} boundary loops")
        _finish("contour", out_dir, inputs, seed, [svg_path], started)


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------

@construct_app.command("wagner")
def cmd_construct_wagner(
    R: float = typer.Option(..., "--R", help="Generator parameter R > 1"),
    alpha: float = typer.Option(1.0, "--alpha", help="Level exponent: t = (log M)^alpha"),
    tol: float = typer.Option(1e-12, "--tol", help="Series truncation tolerance"),
    degree_cap: int = typer.Option(1_000_000, "--degree-cap", help="Largest allowed degree M"),
    generator: str = typer.Option("exp-exp", "--generator", help="exp-exp or exp"),
    placement: str = typer.Option("left", "--placement", help="Atom placement: left or midpoint"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Build the small-area circle polynomial for one R."""
    started = recipes.utc_now()
    with _handled("construct wagner"):
        params = WagnerParams(
            R=R, truncation_tolerance=tol, alpha=alpha, degree_cap=degree_cap, generator=generator
        )
        inputs = dataclasses.asdict(params) | {"placement": placement}
        result = wagner_polynomial(params, placement=placement)
        out_dir = _run_dir("construct-wagner", inputs, out)
        json_path = _write_json(out_dir / "wagner.json", result.to_json())
        typer.echo(
            f"N={result.series.N} M={result.M} level={result.level:.6f} "
            f"boundedness={'ok' if result.boundedness.ok else 'FAILED'}"
        )
        _finish("construct-wagner", out_dir, inputs, None, [json_path], started)


@construct_app.command("push")
def cmd_construct_push(
    eps: float = typer.Option(..., "--eps", help="Pushing radius 1 - eps, 0 < eps < 1"),
    family: str | None = typer.Option(None, "--family", help="erdos, erdos-deflated, stretched or cnh"),
    n: int | None = typer.Option(None, "--n", help="Degree for --family"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    roots: str | None = typer.Option(None, "--roots", help="Configuration JSON"),
    roots_file: Path | None = typer.Option(None, "--roots-file", help="Configuration JSON file"),
    random_degree: int | None = typer.Option(None, "--random-degree", help="Seeded random roots in the disc"),
    mode: str = typer.Option("deterministic", "--mode", help="deterministic or probabilistic"),
    L: int | None = typer.Option(None, "--L", help="Replacement count (probabilistic mode)"),
    a_n: float | None = typer.Option(None, "--a-n", help="Area lower bound, reported as failure bound"),
    rounding: str = typer.Option("floor", "--rounding", help="floor or ceil of 6/eps^2"),
    grid: int = typer.Option(200, "--grid", help="Polar test grid size"),
    seed: int = typer.Option(0, "--seed", help="Seed for random roots and sampling"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Move every zero to the unit circle."""
    started = recipes.utc_now()
    with _handled("construct push"):
        config = _resolve_config(family, n, h, roots, roots_file, random_degree, seed)
        inputs = {"config": config.to_json(), "eps": eps, "mode": mode, "grid": grid, "seed": seed}
        if mode == "deterministic":
            inputs["rounding"] = rounding
            result = push_zeros_deterministic(config, eps, rounding=rounding, grid=grid)
        elif mode == "probabilistic":
            if L is None:
                raise ValueError("--mode probabilistic needs --L")
            inputs |= {"L": L, "a_n": a_n}
            result = push_zeros_probabilistic(config, eps, L, seed, grid=grid, a_n=a_n)
        else:
            raise ValueError(f"--mode must be deterministic or probabilistic, got {mode!r}")
        out_dir = _run_dir("construct-push", inputs, out)
        json_path = _write_json(out_dir / "push.json", result.to_json())
        typer.echo(
            f"L={result.L} degree={result.pushed.degree} inner={result.inner_count} "
            f"margin={result.comparison_margin:.6g}"
        )
        _finish("construct-push", out_dir, inputs, seed, [json_path], started)


@construct_app.command("family")
def cmd_construct_family(
    family: str = typer.Option(..., "--family", help="erdos, erdos-deflated, stretched or cnh"),
    n: int = typer.Option(..., "--n", help="Degree"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Write a named configuration as JSON."""
    started = recipes.utc_now()
    with _handled("construct family"):
        config = _resolve_config(family, n, h, None, None, None, 0)
        inputs = {"family": family, "n": n, "h": h}
        out_dir = _run_dir("construct-family", inputs, out)
        path = out_dir / "config.json"
        path.write_text(dumps_config(config) + "\n")
        typer.echo(f"{family} n={n}: degree {config.degree}, {len(config.roots)} distinct roots")
        _finish("construct-family", out_dir, inputs, None, [path], started)


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

@search_app.command("exhaustive")
def cmd_search_exhaustive(
    n: int | None = typer.Option(None, "--n", help="Degree"),
    m: int | None = typer.Option(None, "--m", help="Grid size"),
    symmetry: str = typer.Option("conjugate", "--symmetry", help="conjugate or none"),
    anchor_one: bool = typer.Option(False, "--anchor-one", help="Require a root at 1"),
    max_mult: int | None = typer.Option(None, "--max-mult", help="Cap on the multiplicity at 1 and -1"),
    min_q: int | None = typer.Option(None, "--min-q", help="Least multiplicity at 1"),
    budget: int = typer.Option(10_000_000, "--budget", help="Largest allowed candidate count"),
    t: float | None = typer.Option(None, "--t", help="Level (default 1)"),
    search_preset: str | None = typer.Option(None, "--search-preset", help="Search preset from recipes.yaml"),
    kind: str | None = typer.Option(None, "--kind", help="square, triangular or uniform"),
    p: int | None = typer.Option(None, "--p", help="Points per trial"),
    trials: int | None = typer.Option(None, "--trials", help="Number of trials"),
    seed: int | None = typer.Option(None, "--seed", help="Sampler seed"),
    preset: str | None = typer.Option(None, "--preset", help="Sampler preset from recipes.yaml"),
    presets_path: Path = typer.Option(recipes.DEFAULT_PRESETS, "--presets", help="Path to recipes.yaml"),
    no_confirm: bool = typer.Option(False, "--no-confirm", help="Skip the 10x re-estimate of the winner"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Evaluate every candidate of a grid search space."""
    started = recipes.utc_now()
    with _handled("search exhaustive"):
        if search_preset is not None:
            found = recipes.load_presets(presets_path).search(search_preset)
            n = found.n if n is None else n
            m = found.m if m is None else m
            t = found.level if t is None else t
            preset = found.sampler if preset is None else preset
            min_q = found.min_q if min_q is None else min_q
        if n is None or m is None:
            raise ValueError("give --n and --m, or --search-preset")
        t = 1.0 if t is None else t
        sampler = _resolve_sampler(preset, presets_path, kind, p, trials, seed)
        space = SearchSpace(
            n=n, m=m, symmetry=Symmetry(symmetry), anchor_one=anchor_one,
            max_multiplicity=max_mult, min_multiplicity_at_one=min_q or 0, budget=budget,
        )
        inputs = {"space": space.to_json(), "t": t, "sampler": _sampler_json(sampler), "confirm": not no_confirm}
        report = exhaustive_search(space, t, sampler, threads=threads, confirm=not no_confirm)
        out_dir = _run_dir("search-exhaustive", inputs, out)
        report_path = out_dir / "report.json"
        trace_path = persist_report(report, report_path)
        typer.echo(f"{report.evaluated} candidates; best area {report.best_area.mean:.6f} +- {report.best_area.stddev:.6f}")
        if report.confirmed_area is not None:
            typer.echo(f"confirmed area {report.confirmed_area.mean:.6f} +- {report.confirmed_area.stddev:.6f}")
        typer.echo(f"best: {json.dumps(report.best.to_json())}")
        typer.echo(f"{len(report.ties)} near-ties")
        _finish("search-exhaustive", out_dir, inputs, sampler.seed, [report_path, trace_path], started)


@search_app.command("local")
def cmd_search_local(
    family: str | None = typer.Option(None, "--family", help="erdos, erdos-deflated, stretched or cnh"),
    n: int | None = typer.Option(None, "--n", help="Degree for --family"),
    h: int | None = typer.Option(None, "--h", help="Merged roots for --family cnh"),
    roots: str | None = typer.Option(None, "--roots", help="Starting configuration JSON"),
    roots_file: Path | None = typer.Option(None, "--roots-file", help="Starting configuration JSON file"),
    t: float = typer.Option(1.0, "--t", help="Level"),
    arc_disc: int = typer.Option(16, "--arc-disc", help="Positions tried per arc"),
    max_cycles: int = typer.Option(50, "--max-cycles", help="Cycle limit"),
    kind: str | None = typer.Option(None, "--kind", help="square, triangular or uniform"),
    p: int | None = typer.Option(None, "--p", help="Points per trial"),
    trials: int | None = typer.Option(None, "--trials", help="Number of trials"),
    seed: int | None = typer.Option(None, "--seed", help="Sampler seed"),
    preset: str | None = typer.Option(None, "--preset", help="Sampler preset from recipes.yaml"),
    presets_path: Path = typer.Option(recipes.DEFAULT_PRESETS, "--presets", help="Path to recipes.yaml"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Cyclic coordinate descent from a starting configuration on the circle."""
    started = recipes.utc_now()
    with _handled("search local"):
        sampler = _resolve_sampler(preset, presets_path, kind, p, trials, seed)
        config = _resolve_config(family, n, h, roots, roots_file, None, sampler.seed)
        inputs = {
            "config": config.to_json(), "t": t, "arc_disc": arc_disc,
            "max_cycles": max_cycles, "sampler": _sampler_json(sampler),
        }
        report = local_search(config, t, sampler, arc_disc, max_cycles=max_cycles, threads=threads)
        out_dir = _run_dir("search-local", inputs, out)
        report_path = out_dir / "report.json"
        trace_path = persist_report(report, report_path)
        typer.echo(f"{report.cycles} cycles; area {report.best_area.mean:.6f} +- {report.best_area.stddev:.6f}")
        typer.echo(f"best: {json.dumps(report.best.to_json())}")
        _finish("search-local", out_dir, inputs, sampler.seed, [report_path, trace_path], started)


@search_app.command("cnh")
def cmd_search_cnh(
    n_min: int = typer.Option(2, "--n-min", help="Smallest n"),
    n_max: int = typer.Option(8, "--n-max", help="Largest n"),
    t: float = typer.Option(1.0, "--t", help="Level"),
    kind: str | None = typer.Option(None, "--kind", help="square, triangular or uniform"),
    p: int | None = typer.Option(None, "--p", help="Points per trial"),
    trials: int | None = typer.Option(None, "--trials", help="Number of trials"),
    seed: int | None = typer.Option(None, "--seed", help="Sampler seed"),
    preset: str | None = typer.Option(None, "--preset", help="Sampler preset from recipes.yaml"),
    presets_path: Path = typer.Option(recipes.DEFAULT_PRESETS, "--presets", help="Path to recipes.yaml"),
    threads: int | None = typer.Option(None, "--threads", help="Worker threads (default: all cores)"),
    out: Path | None = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Area of C_{n,h} for every h <= n, and the best h per n."""
    started = recipes.utc_now()
    with _handled("search cnh"):
        if n_min < 1 or n_max < n_min:
            raise ValueError(f"need 1 <= --n-min <= --n-max, got {n_min}..{n_max}")
        sampler = _resolve_sampler(preset, presets_path, kind, p, trials, seed)
        inputs = {"n_min": n_min, "n_max": n_max, "t": t, "sampler": _sampler_json(sampler)}
        table = cnh_sweep(range(n_min, n_max + 1), t, sampler, threads=threads)
        out_dir = _run_dir("search-cnh", inputs, out)
        csv_path = out_dir / "cnh.csv"
        write_cnh_csv(table, csv_path)
        json_path = _write_json(
            out_dir / "cnh.json",
            {"level": t, "argmin": {str(k): v for k, v in table.argmin.items()}, "floor": table.floor},
        )
        for n_value, h_best in table.argmin.items():
            typer.echo(f"n={n_value}: best h={h_best}")
        typer.echo(f"area floor over h < n: {recipes.format_area(table.floor)}")
        _finish("search-cnh", out_dir, inputs, sampler.seed, [csv_path, json_path], started)


if __name__ == "__main__":
    app()
