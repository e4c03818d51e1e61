"""
Grid geometry of lemniscates.

Everything here starts from a GridMask: f = log|p| - log t sampled at the
centres of an N x N pixel grid covering [-W, W]^2. From it:

  - inradius: exact Euclidean distance transform (cv2, precise mask)
  - perimeter and boundary loops: marching squares on f with linear
    interpolation along pixel edges; saddle cells are split by the sign
    of f at the cell centre
  - component count: 4-connected labelling (cv2)
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, partial
from itertools import combinations

import cv2
import numpy as np

from lemnikit.poly import ConstraintTag, LevelSetSpec, log_abs_eval
from lemnikit.sampling import bounding_radius, enclosing_radius, resolve_threads

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 64
MIN_METRIC_RESOLUTION = 128
WINDOW_PAD = 1.02
# stands in for -inf at roots when interpolating edge crossings
_FLOOR = -1e6
_ROW_BLOCK = 64


@dataclass(frozen=True, eq=False)
class GridMask:
    resolution: int
    window_radius: float
    values: np.ndarray  # f at pixel centres, row index = y

    @property
    def cell(self) -> float:
        return 2.0 * self.window_radius / self.resolution

    @cached_property
    def centres(self) -> np.ndarray:
        return -self.window_radius + (np.arange(self.resolution) + 0.5) * self.cell

    @cached_property
    def bits(self) -> np.ndarray:
        return self.values < 0.0


def default_window_radius(spec: LevelSetSpec) -> float:
    if spec.config.tag is ConstraintTag.NONE:
        return WINDOW_PAD * enclosing_radius(spec)
    return WINDOW_PAD * bounding_radius(spec)


def _rows(spec: LevelSetSpec, xs: np.ndarray, rows: range) -> np.ndarray:
    pts = xs[None, :] + 1j * xs[rows.start:rows.stop, None]
    return log_abs_eval(spec.config, pts) - spec.log_level


def build_grid_mask(
    spec: LevelSetSpec,
    resolution: int,
    *,
    window_radius: float | None = None,
    threads: int | None = None,
) -> GridMask:
    """Sample f over the window; rows are evaluated in parallel blocks."""
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    if window_radius is None:
        window = default_window_radius(spec)
    else:
        window = float(window_radius)
        if not (math.isfinite(window) and window > 0):
            raise ValueError(f"window radius must be positive, got {window_radius!r}")

    cell = 2.0 * window / resolution
    xs = -window + (np.arange(resolution) + 0.5) * cell
    blocks = [range(s, min(s + _ROW_BLOCK, resolution)) for s in range(0, resolution, _ROW_BLOCK)]
    workers = min(resolve_threads(threads), len(blocks))
    fill = partial(_rows, spec, xs)
    if workers == 1:
        parts = [fill(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fill, blocks))
    return GridMask(resolution=resolution, window_radius=window, values=np.vstack(parts))


# ---------------------------------------------------------------------------
# Inradius
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InradiusEstimate:
    value: float
    error_bound: float
    cell: float


def inradius_estimate(
    spec: LevelSetSpec, resolution: int = 512, *, threads: int | None = None
) -> InradiusEstimate:
    """Largest inscribed disc radius, accurate to two cell diagonals."""
    if resolution < MIN_METRIC_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_METRIC_RESOLUTION}, got {resolution}")
    grid = build_grid_mask(spec, resolution, threads=threads)
    h = grid.cell
    error = 2.0 * math.sqrt(2.0) * h
    mask = grid.bits.astype(np.uint8)
    if not mask.any():
        return InradiusEstimate(value=0.0, error_bound=error, cell=h)
    dist = cv2.distanceTransform(mask, cv2.DIST_L2, cv2.DIST_MASK_PRECISE)
    # distances run centre to centre; the boundary sits about half a cell closer
    value = max(float(dist.max()) * h - 0.5 * h, 0.0)
    return InradiusEstimate(value=value, error_bound=error, cell=h)


# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------

def component_count(
    spec: LevelSetSpec, resolution: int = 1024, *, threads: int | None = None
) -> int:
    if resolution < MIN_METRIC_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_METRIC_RESOLUTION}, got {resolution}")
    grid = build_grid_mask(spec, resolution, threads=threads)
    mask = grid.bits.astype(np.uint8)
    if not mask.any():
        return 0
    labels, _ = cv2.connectedComponents(mask, connectivity=4)
    return int(labels) - 1


# ---------------------------------------------------------------------------
# Marching squares
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ContourSegments:
    start: np.ndarray
    end: np.ndarray
    start_edge: np.ndarray
    end_edge: np.ndarray

    @property
    def lengths(self) -> np.ndarray:
        return np.abs(self.end - self.start)


def _crossing_t(fa: np.ndarray, fb: np.ndarray, crossed: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(crossed, fa / (fa - fb), np.nan)


def contour_segments(spec: LevelSetSpec, grid: GridMask) -> ContourSegments:
    """Marching-squares segments of f = 0 over the grid's pixel centres.

    Cell (i, j) has corners v0=(i,j), v1=(i,j+1), v2=(i+1,j+1), v3=(i+1,j)
    and edges e0=v0v1, e1=v1v2, e2=v3v2, e3=v0v3. Edge ids are global so
    neighbouring cells share them.
    """
    n = grid.resolution
    xs = grid.centres
    h = grid.cell
    f = np.maximum(grid.values, _FLOOR)
    inside = grid.bits

    h_cross = inside[:, :-1] != inside[:, 1:]
    h_t = _crossing_t(f[:, :-1], f[:, 1:], h_cross)
    h_pts = (xs[None, :-1] + h_t * h) + 1j * xs[:, None]
    h_ids = np.arange(n * (n - 1)).reshape(n, n - 1)

    v_cross = inside[:-1, :] != inside[1:, :]
    v_t = _crossing_t(f[:-1, :], f[1:, :], v_cross)
    v_pts = xs[None, :] + 1j * (xs[:-1, None] + v_t * h)
    v_ids = n * (n - 1) + np.arange((n - 1) * n).reshape(n - 1, n)

    crossed = [h_cross[:-1, :], v_cross[:, 1:], h_cross[1:, :], v_cross[:, :-1]]
    points = [h_pts[:-1, :], v_pts[:, 1:], h_pts[1:, :], v_pts[:, :-1]]
    ids = [h_ids[:-1, :], v_ids[:, 1:], h_ids[1:, :], v_ids[:, :-1]]
    count = sum(c.astype(np.int8) for c in crossed)

    starts, ends, start_ids, end_ids = [], [], [], []

    def emit(a: int, b: int, sel: np.ndarray) -> None:
        starts.append(points[a][sel])
        ends.append(points[b][sel])
        start_ids.append(ids[a][sel])
        end_ids.append(ids[b][sel])

    simple = count == 2
    for a, b in combinations(range(4), 2):
        emit(a, b, simple & crossed[a] & crossed[b])

    saddle = count == 4
    if saddle.any():
        ii, jj = np.nonzero(saddle)
        centre = (xs[jj] + 0.5 * h) + 1j * (xs[ii] + 0.5 * h)
        centre_inside = (log_abs_eval(spec.config, centre) - spec.log_level) < 0.0
        joined = np.zeros_like(saddle)
        joined[ii, jj] = centre_inside == inside[ii, jj]
        # centre agrees with v0: v0 and v2 connect, cut off v1 and v3
        emit(0, 1, saddle & joined)
        emit(2, 3, saddle & joined)
        emit(0, 3, saddle & ~joined)
        emit(1, 2, saddle & ~joined)

    return ContourSegments(
        start=np.concatenate(starts),
        end=np.concatenate(ends),
        start_edge=np.concatenate(start_ids),
        end_edge=np.concatenate(end_ids),
    )


def perimeter_estimate(
    spec: LevelSetSpec, resolution: int = 1024, *, threads: int | None = None
) -> float:
    """Total length of the level curve |p| = t."""
    if resolution < MIN_METRIC_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_METRIC_RESOLUTION}, got {resolution}")
    grid = build_grid_mask(spec, resolution, threads=threads)
    segments = contour_segments(spec, grid)
    if segments.start.size == 0:
        raise ValueError("no contour found: the lemniscate is empty or fills the window")
    return float(segments.lengths.sum())


def contour_loops(
    spec: LevelSetSpec, resolution: int = 1024, *, threads: int | None = None
) -> list[np.ndarray]:
    """Boundary polylines, linked through shared edge crossings.

    Closed loops repeat their first point at the end.
    """
    grid = build_grid_mask(spec, resolution, threads=threads)
    seg = contour_segments(spec, grid)
    if seg.start.size == 0:
        raise ValueError("no contour found: the lemniscate is empty or fills the window")

    by_edge: dict[int, list[int]] = {}
    for k, (a, b) in enumerate(zip(seg.start_edge.tolist(), seg.end_edge.tolist(), strict=True)):
        by_edge.setdefault(a, []).append(k)
        by_edge.setdefault(b, []).append(k)

    visited = np.zeros(seg.start.size, dtype=bool)
    loops: list[np.ndarray] = []
    for first in range(seg.start.size):
        if visited[first]:
            continue
        visited[first] = True
        pts = [seg.start[first], seg.end[first]]
        origin = int(seg.start_edge[first])
        edge = int(seg.end_edge[first])
        while edge != origin:
            nxt = [k for k in by_edge.get(edge, ()) if not visited[k]]
            if not nxt:
                break
            k = nxt[0]
            visited[k] = True
            if int(seg.start_edge[k]) == edge:
                pts.append(seg.end[k])
                edge = int(seg.end_edge[k])
            else:
                pts.append(seg.start[k])
                edge = int(seg.start_edge[k])
        loops.append(np.array(pts, dtype=np.complex128))
    return loops


def contours_to_svg(loops: list[np.ndarray], window_radius: float, size: int = 800) -> str:
    """One <path> per loop; y axis flipped so the picture matches the plane."""
    w = float(window_radius)
    stroke = 2.0 * w / size
    paths = []
    for loop in loops:
        head = f"M {loop[0].real:.6f} {loop[0].imag:.6f}"
        body = " ".join(f"L {z.real:.6f} {z.imag:.6f}" for z in loop[1:])
        close = " Z" if loop.size > 2 and loop[0] == loop[-1] else ""
        paths.append(f'    <path d="{head} {body}{close}"/>')
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{-w:.6f} {-w:.6f} {2 * w:.6f} {2 * w:.6f}">',
        f'  <g transform="scale(1,-1)" fill="none" stroke="black" stroke-width="{stroke:.6f}">',
        *paths,
        "  </g>",
        "</svg>",
        "",
    ])
