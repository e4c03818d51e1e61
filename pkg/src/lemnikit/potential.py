"""
Logarithmic potentials on and around the unit circle.

A CircleMeasure is a band-limited probability measure on T stored by its
Fourier coefficients mu(k) = integral of e^{-ik theta} dmu, k = 1..N:

    density  v(theta) = 1 + 2 Re sum_k mu(k) e^{ik theta}      (w.r.t. dtheta/2pi)
    potential          = -Re sum_k mu(k) z^k / k                       |z| < 1
                       = log|z| - Re sum_k conj(mu(k)) z^-k / k        |z| > 1

Its discretization is a DiscreteCircleMeasure: M atoms of mass 1/M placed
on an equal-mass partition of the circle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as P

from lemnikit.poly import RootConfiguration, log_abs_eval

logger = logging.getLogger(__name__)

NEAR_CIRCLE_TOL = 1e-9
PARTITION_MASS_TOL = 1e-13
_MIN_PANELS = 4096
_BLOCK_ELEMENTS = 1 << 21
_NEWTON_ITERATIONS = 60


class AtomPlacement(StrEnum):
    LEFT = "left"
    MIDPOINT = "midpoint"


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Probability measure on T with density 1 + 2 Re sum mu(k) e^{ik theta}."""

    coeffs: np.ndarray  # mu(1..N), complex

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("measure coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def uniform(cls) -> CircleMeasure:
        return cls(np.zeros(0, dtype=np.complex128))

    @property
    def terms(self) -> int:
        return int(self.coeffs.size)

    @cached_property
    def _k(self) -> np.ndarray:
        return np.arange(1, self.terms + 1, dtype=np.float64)

    def _series(self, theta: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Re sum_k weights[k] e^{ik theta}, blocked over theta."""
        out = np.zeros(theta.shape, dtype=np.float64)
        if self.terms == 0:
            return out
        step = max(1, _BLOCK_ELEMENTS // self.terms)
        for start in range(0, theta.size, step):
            block = theta[start:start + step]
            phases = np.exp(1j * np.outer(block, self._k))
            out[start:start + step] = (phases @ weights).real
        return out

    def density(self, theta: Any) -> Any:
        th = np.asarray(theta, dtype=np.float64)
        flat = th.reshape(-1)
        out = 1.0 + 2.0 * self._series(flat, self.coeffs)
        return float(out[0]) if th.ndim == 0 else out.reshape(th.shape)

    def cdf(self, theta: Any) -> Any:
        """mu([0, theta]) for theta in [0, 2 pi], from the exact antiderivative."""
        th = np.asarray(theta, dtype=np.float64)
        flat = th.reshape(-1)
        out = flat / (2 * math.pi)
        if self.terms:
            weights = self.coeffs / (1j * self._k)
            constant = float(weights.sum().real)
            out = out + (self._series(flat, weights) - constant) / math.pi
        return float(out[0]) if th.ndim == 0 else out.reshape(th.shape)

    def density_bounds(self, grid: int = 10_000) -> tuple[float, float]:
        if grid < 1:
            raise ValueError(f"grid must be >= 1, got {grid}")
        v = self.density(2 * math.pi * np.arange(grid) / grid)
        return float(v.min()), float(v.max())

    def to_json(self) -> dict[str, Any]:
        return {
            "coeffs": [
                {"k": k, "re": float(c.real), "im": float(c.imag)}
                for k, c in enumerate(self.coeffs.tolist(), start=1)
            ]
        }

    @classmethod
    def from_json(cls, obj: Any) -> CircleMeasure:
        if not isinstance(obj, dict) or not isinstance(obj.get("coeffs"), list):
            raise ValueError("measure: expected an object with a 'coeffs' list")
        entries: dict[int, complex] = {}
        for i, item in enumerate(obj["coeffs"]):
            if not isinstance(item, dict):
                raise ValueError(f"coeffs[{i}]: expected an object")
            k = item.get("k")
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ValueError(f"coeffs[{i}].k: expected positive integer, got {k!r}")
            if k in entries:
                raise ValueError(f"coeffs[{i}].k: duplicate index {k}")
            for key in ("re", "im"):
                value = item.get(key, 0.0)
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ValueError(f"coeffs[{i}].{key}: expected a number, got {value!r}")
            entries[k] = complex(item.get("re", 0.0), item.get("im", 0.0))
        arr = np.zeros(max(entries, default=0), dtype=np.complex128)
        for k, c in entries.items():
            arr[k - 1] = c
        return cls(arr)


@dataclass(frozen=True, eq=False)
class DiscreteCircleMeasure:
    """M atoms e^{i theta_j} of mass 1/M each."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.angles, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ValueError("discrete measure needs at least one atom")
        if arr[0] < 0.0 or arr[-1] >= 2 * math.pi:
            raise ValueError("atom angles must lie in [0, 2 pi)")
        if np.any(np.diff(arr) <= 0.0):
            raise ValueError("atom angles must be strictly increasing")
        arr.flags.writeable = False
        object.__setattr__(self, "angles", arr)

    @property
    def size(self) -> int:
        return int(self.angles.size)

    def arc_lengths(self) -> np.ndarray:
        return np.diff(np.append(self.angles, self.angles[0] + 2 * math.pi))

    @cached_property
    def configuration(self) -> RootConfiguration:
        return RootConfiguration.from_angles(self.angles / (2 * math.pi))

    def to_configuration(self) -> RootConfiguration:
        return self.configuration

    def to_json(self) -> dict[str, Any]:
        turns = (self.angles / (2 * math.pi)).tolist()
        return {"angles_over_2pi": turns, "mults": [1] * len(turns)}

    @classmethod
    def from_json(cls, obj: Any) -> DiscreteCircleMeasure:
        if not isinstance(obj, dict) or not isinstance(obj.get("angles_over_2pi"), list):
            raise ValueError("discrete measure: expected an 'angles_over_2pi' list")
        mults = obj.get("mults")
        if mults is not None and any(m != 1 for m in mults):
            raise ValueError("mults: discrete measures carry unit masses only")
        return cls(2 * math.pi * np.asarray(obj["angles_over_2pi"], dtype=np.float64))


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------

def discrete_potential(source: RootConfiguration | DiscreteCircleMeasure, z: Any) -> Any:
    """(1/n) log|p(z)|, the potential of the normalized zero counting measure."""
    config = source.configuration if isinstance(source, DiscreteCircleMeasure) else source
    value = log_abs_eval(config, z)
    return value / config.degree


def series_potential(
    measure: CircleMeasure, z: Any, *, accept_near_circle: bool = False
) -> Any:
    """Potential of a band-limited measure from its Laurent series.

    Points within 1e-9 of |z| = 1 are rejected unless accept_near_circle is
    set, in which case the truncated series is used as is.
    """
    pts = np.asarray(z, dtype=np.complex128)
    flat = pts.reshape(-1)
    mods = np.abs(flat)
    near = np.abs(mods - 1.0) <= NEAR_CIRCLE_TOL
    if np.any(near):
        if not accept_near_circle:
            raise ValueError(
                f"series potential evaluated at |z| = {mods[near][0]!r}, too close to the circle"
            )
        logger.warning("Evaluating the potential series at %d points near |z| = 1", int(near.sum()))

    ks = np.arange(1, measure.terms + 1, dtype=np.float64)
    inner = np.concatenate(([0.0], measure.coeffs / ks)) if measure.terms else np.zeros(1)
    out = np.empty(flat.shape, dtype=np.float64)
    inside = mods < 1.0
    out[inside] = -P.polyval(flat[inside], inner).real
    outside = ~inside
    if np.any(outside):
        w = flat[outside]
        out[outside] = np.log(np.abs(w)) - P.polyval(1.0 / w, np.conj(inner)).real
    return float(out[0]) if pts.ndim == 0 else out.reshape(pts.shape)


def potential_gap(
    measure: CircleMeasure, atoms: DiscreteCircleMeasure, points: Any
) -> float:
    """max |U_mu - U_nu| over the given points."""
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    diff = series_potential(measure, pts) - discrete_potential(atoms, pts)
    return float(np.max(np.abs(diff)))


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------

def equal_mass_partition(
    measure: CircleMeasure,
    M: int,
    *,
    placement: AtomPlacement | str = AtomPlacement.LEFT,
) -> DiscreteCircleMeasure:
    """Atoms at theta_0 = 0 < theta_1 < ... with mu([theta_j, theta_j+1]) = 1/M.

    The CDF is inverted with Newton steps kept inside a bracket taken from a
    tabulated CDF; iteration stops at PARTITION_MASS_TOL in mass.
    """
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    placement = AtomPlacement(placement)
    panels = max(64 * measure.terms, _MIN_PANELS)
    grid = np.linspace(0.0, 2 * math.pi, panels + 1)
    vmin = float(measure.density(grid).min())
    if vmin <= 0.0:
        raise ValueError(f"measure density must be positive, minimum on the grid is {vmin!r}")

    offset = 0.5 if placement is AtomPlacement.MIDPOINT else 0.0
    targets = (np.arange(M, dtype=np.float64) + offset) / M
    table = measure.cdf(grid)
    table[0], table[-1] = 0.0, 1.0

    upper = np.clip(np.searchsorted(table, targets, side="right"), 1, panels)
    lo = grid[upper - 1].copy()
    hi = grid[upper].copy()
    f_lo = table[upper - 1]
    f_hi = table[upper]
    x = lo + (hi - lo) * (targets - f_lo) / np.where(f_hi > f_lo, f_hi - f_lo, 1.0)

    active = np.ones(M, dtype=bool)
    for _ in range(_NEWTON_ITERATIONS):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        xi = x[idx]
        resid = measure.cdf(xi) - targets[idx]
        done = np.abs(resid) <= PARTITION_MASS_TOL
        above = resid > 0
        hi[idx] = np.where(above, xi, hi[idx])
        lo[idx] = np.where(above, lo[idx], xi)
        step = xi - resid / (measure.density(xi) / (2 * math.pi))
        bisect = 0.5 * (lo[idx] + hi[idx])
        x[idx] = np.where(done, xi, np.where((step > lo[idx]) & (step < hi[idx]), step, bisect))
        active[idx[done]] = False

    if active.any():
        logger.warning("Partition did not reach mass tolerance for %d atoms", int(active.sum()))
    if placement is AtomPlacement.LEFT:
        x[0] = 0.0
    return DiscreteCircleMeasure(x)
