"""
Monic polynomials stored as root multisets, evaluated in the log domain.

A polynomial is its distinct roots with explicit multiplicities. |p(z)| is
never formed: everything goes through

    log|p(z)| = sum_k m_k * log|z - w_k|

which stays finite long after |p| itself would overflow (degree ~700 at
|z| = 3 is already out of float range).

Lemniscates are strict sublevel sets: z belongs to the level-t lemniscate
iff log|p(z)| < log t. The boundary has measure zero, so every area figure
is the same for the closed set.
"""

from __future__ import annotations

import cmath
import json
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

DISC_TOL = 1e-12
CIRCLE_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-12

# complex entries materialized per block in log_abs_eval
_BLOCK_ELEMENTS = 1 << 21


class ConstraintTag(StrEnum):
    UNIT_DISC = "UNIT_DISC"
    UNIT_CIRCLE = "UNIT_CIRCLE"
    NONE = "NONE"


def as_point(value: Any) -> complex:
    """Coerce to a finite complex number. Rejects NaN and Inf."""
    try:
        z = complex(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"not a complex number: {value!r}") from e
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"complex point must be finite, got {z!r}")
    return z


def unit_point(turns: float) -> complex:
    """e^{2 pi i turns}, exact at quarter turns so 1, i, -1, -i come out exact."""
    frac = float(turns) % 1.0
    quarter = frac * 4.0
    if quarter == int(quarter):
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(quarter) % 4]
    return cmath.exp(2j * math.pi * frac)


def infer_tag(locations: Iterable[complex]) -> ConstraintTag:
    """Tightest tag the locations satisfy."""
    mods = np.abs(np.fromiter((complex(z) for z in locations), dtype=np.complex128))
    if mods.size and np.all(np.abs(mods - 1.0) <= CIRCLE_TOL):
        return ConstraintTag.UNIT_CIRCLE
    if mods.size and np.all(mods <= 1.0 + DISC_TOL):
        return ConstraintTag.UNIT_DISC
    return ConstraintTag.NONE


def _weaker_tag(a: ConstraintTag, b: ConstraintTag) -> ConstraintTag:
    if ConstraintTag.NONE in (a, b):
        return ConstraintTag.NONE
    if ConstraintTag.UNIT_DISC in (a, b):
        return ConstraintTag.UNIT_DISC
    return ConstraintTag.UNIT_CIRCLE


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootConfiguration:
    """Root multiset of a monic polynomial.

    `roots` holds (location, multiplicity) pairs with distinct locations;
    exact duplicates passed in are merged. Immutable, hashable, and safe to
    share between threads.
    """

    roots: tuple[tuple[complex, int], ...]
    tag: ConstraintTag = ConstraintTag.NONE

    def __post_init__(self) -> None:
        merged: dict[complex, int] = {}
        for i, pair in enumerate(self.roots):
            try:
                loc, mult = pair
            except (TypeError, ValueError) as e:
                raise ValueError(f"roots[{i}]: expected (location, multiplicity)") from e
            loc = as_point(loc)
            if isinstance(mult, bool) or int(mult) != mult or int(mult) < 1:
                raise ValueError(f"roots[{i}].mult: expected positive integer, got {mult!r}")
            # canonical signed zeros keep serialized output stable
            loc = complex(loc.real + 0.0, loc.imag + 0.0)
            merged[loc] = merged.get(loc, 0) + int(mult)
        if not merged:
            raise ValueError("configuration needs at least one root")
        tag = ConstraintTag(self.tag)
        object.__setattr__(self, "roots", tuple(merged.items()))
        object.__setattr__(self, "tag", tag)
        mods = np.abs(self.locations)
        if tag is ConstraintTag.UNIT_DISC and np.any(mods > 1.0 + DISC_TOL):
            raise ValueError(f"UNIT_DISC configuration has a root of modulus {mods.max():.17g}")
        if tag is ConstraintTag.UNIT_CIRCLE and np.any(np.abs(mods - 1.0) > CIRCLE_TOL):
            worst = mods[np.argmax(np.abs(mods - 1.0))]
            raise ValueError(f"UNIT_CIRCLE configuration has a root of modulus {worst:.17g}")

    @classmethod
    def from_roots(
        cls,
        roots: Iterable[complex],
        mults: Iterable[int] | None = None,
        tag: ConstraintTag | None = None,
    ) -> RootConfiguration:
        """Build from locations (and optional multiplicities). Tag inferred when omitted."""
        locs = [as_point(r) for r in roots]
        ms = [1] * len(locs) if mults is None else list(mults)
        if len(ms) != len(locs):
            raise ValueError(f"{len(locs)} roots but {len(ms)} multiplicities")
        if tag is None:
            tag = infer_tag(locs)
        return cls(tuple(zip(locs, ms, strict=True)), tag=tag)

    @classmethod
    def from_angles(
        cls, angles_over_2pi: Iterable[float], mults: Iterable[int] | None = None
    ) -> RootConfiguration:
        """Circle configuration from angles measured in turns."""
        turns = [float(a) for a in angles_over_2pi]
        return cls.from_roots(
            [unit_point(a) for a in turns], mults, tag=ConstraintTag.UNIT_CIRCLE
        )

    @cached_property
    def locations(self) -> np.ndarray:
        arr = np.array([loc for loc, _ in self.roots], dtype=np.complex128)
        arr.flags.writeable = False
        return arr

    @cached_property
    def multiplicities(self) -> np.ndarray:
        arr = np.array([m for _, m in self.roots], dtype=np.int64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def degree(self) -> int:
        return int(self.multiplicities.sum())

    def angles(self) -> np.ndarray:
        """Root arguments in [0, 2 pi), sorted, repeated by multiplicity."""
        theta = np.mod(np.angle(self.locations), 2 * math.pi)
        theta[theta >= 2 * math.pi] = 0.0
        return np.sort(np.repeat(theta, self.multiplicities))

    def to_json(self) -> dict[str, Any]:
        return {
            "roots": [
                {"re": loc.real, "im": loc.imag, "mult": int(m)} for loc, m in self.roots
            ],
            "tag": self.tag.value,
        }

    @classmethod
    def from_json(cls, obj: Any) -> RootConfiguration:
        """Parse either the full form or the angles-only shorthand.

        Structural problems raise ValueError naming the offending field,
        e.g. ``roots[2].mult``.
        """
        if not isinstance(obj, dict):
            raise ValueError("configuration: expected a JSON object")
        if "angles_over_2pi" in obj:
            angles = obj["angles_over_2pi"]
            if not isinstance(angles, list) or not angles:
                raise ValueError("angles_over_2pi: expected a non-empty list")
            mults = obj.get("mults")
            if mults is not None and not isinstance(mults, list):
                raise ValueError("mults: expected a list")
            for i, a in enumerate(angles):
                if not isinstance(a, (int, float)) or isinstance(a, bool):
                    raise ValueError(f"angles_over_2pi[{i}]: expected a number, got {a!r}")
            return cls.from_angles(angles, mults)

        raw = obj.get("roots")
        if not isinstance(raw, list) or not raw:
            raise ValueError("roots: expected a non-empty list")
        locs: list[complex] = []
        mults_out: list[int] = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise ValueError(f"roots[{i}]: expected an object")
            for key in ("re", "im"):
                value = item.get(key, 0.0 if key == "im" else None)
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise ValueError(f"roots[{i}].{key}: expected a number, got {value!r}")
            mult = item.get("mult", 1)
            if not isinstance(mult, int) or isinstance(mult, bool) or mult < 1:
                raise ValueError(f"roots[{i}].mult: expected positive integer, got {mult!r}")
            locs.append(complex(item["re"], item.get("im", 0.0)))
            mults_out.append(mult)
        tag_raw = obj.get("tag")
        try:
            tag = None if tag_raw is None else ConstraintTag(tag_raw)
        except ValueError as e:
            raise ValueError(f"tag: unknown constraint tag {tag_raw!r}") from e
        return cls.from_roots(locs, mults_out, tag=tag)


@dataclass(frozen=True)
class LevelSetSpec:
    """A configuration plus a level t > 0: the lemniscate {|p| < t}."""

    config: RootConfiguration
    level: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.level) and self.level > 0):
            raise ValueError(f"level must be a positive finite number, got {self.level!r}")

    @property
    def log_level(self) -> float:
        return math.log(self.level)

    @property
    def degree(self) -> int:
        return self.config.degree


def loads_config(text: str) -> RootConfiguration:
    """Parse configuration JSON text. JSON syntax errors carry line/column."""
    return RootConfiguration.from_json(json.loads(text))


def dumps_config(config: RootConfiguration) -> str:
    return json.dumps(config.to_json(), indent=2)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def log_abs_eval(config: RootConfiguration, z: Any) -> Any:
    """log|p(z)| for a scalar or an array of points (same shape out).

    Returns -inf exactly at roots. Work is blocked so that memory stays
    bounded for configurations with many distinct roots.
    """
    pts = np.asarray(z, dtype=np.complex128)
    flat = pts.reshape(-1)
    locs = config.locations
    weights = config.multiplicities.astype(np.float64)
    out = np.empty(flat.shape, dtype=np.float64)
    step = max(1, _BLOCK_ELEMENTS // locs.size)
    with np.errstate(divide="ignore"):
        for start in range(0, flat.size, step):
            block = flat[start:start + step]
            dist = np.abs(block[:, None] - locs[None, :])
            out[start:start + step] = np.log(dist) @ weights
    if pts.ndim == 0:
        return float(out[0])
    return out.reshape(pts.shape)


def membership(spec: LevelSetSpec, z: Any) -> Any:
    """True where log|p(z)| < log t (strict sublevel set)."""
    inside = log_abs_eval(spec.config, z) < spec.log_level
    return bool(inside) if np.ndim(inside) == 0 else inside


def blaschke_map(a: Any, z: Any) -> Any:
    """B_a(z) = (z - a) / (1 - conj(a) z) for |a| < 1 and |z| <= 1."""
    a = as_point(a)
    if not abs(a) < 1.0:
        raise ValueError(f"Blaschke parameter must satisfy |a| < 1, got {a!r}")
    zs = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(zs) > 1.0 + 1e-9):
        raise ValueError("Blaschke map is only evaluated on the closed unit disc")
    den = 1.0 - np.conj(a) * zs
    if np.any(den == 0):
        raise ValueError(f"Blaschke map pole at z = 1/conj(a) for a = {a!r}")
    out = (zs - a) / den
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def power(config: RootConfiguration, k: int) -> RootConfiguration:
    """Roots of p^k: same locations, multiplicities times k."""
    if int(k) != k or k < 1:
        raise ValueError(f"power must be a positive integer, got {k!r}")
    return RootConfiguration(tuple((w, m * int(k)) for w, m in config.roots), tag=config.tag)


def rotate(config: RootConfiguration, omega: Any) -> RootConfiguration:
    """Roots of p(z / omega): every root multiplied by the unimodular omega."""
    omega = as_point(omega)
    if abs(abs(omega) - 1.0) > CIRCLE_TOL:
        raise ValueError(f"rotation factor must be unimodular, got |omega| = {abs(omega)!r}")
    roots = tuple((w * omega, m) for w, m in config.roots)
    tag = config.tag
    if tag is not ConstraintTag.NONE:
        tag = _weaker_tag(tag, infer_tag(w for w, _ in roots))
    return RootConfiguration(roots, tag=tag)


def conjugate(config: RootConfiguration) -> RootConfiguration:
    return RootConfiguration(
        tuple((w.conjugate(), m) for w, m in config.roots), tag=config.tag
    )


def concat(a: RootConfiguration, b: RootConfiguration) -> RootConfiguration:
    """Roots of the product p_a * p_b."""
    return RootConfiguration(a.roots + b.roots, tag=_weaker_tag(a.tag, b.tag))


def compose_with_generator(
    inner: RootConfiguration,
    outer: RootConfiguration,
    *,
    tol: float = ROOT_RESIDUAL_TOL,
    max_iter: int = 500,
) -> RootConfiguration:
    """Roots of p(q(z)) where q has roots `inner` and p has roots `outer`.

    Each root w of p (multiplicity m) contributes the d roots of q(z) = w,
    each with multiplicity m. A single-root inner polynomial (z - a)^d is
    solved by radicals; anything else goes through Aberth-Ehrlich.
    """
    pieces: list[tuple[complex, int]] = []
    if len(inner.roots) == 1:
        a, d = inner.roots[0]
        for w, m in outer.roots:
            pieces.extend((r, m) for r in _radical_roots(a, d, w))
    else:
        coeffs = np.poly(np.repeat(inner.locations, inner.multiplicities))
        for w, m in outer.roots:
            shifted = coeffs.astype(np.complex128)
            shifted[-1] -= w
            pieces.extend((complex(r), m) for r in _aberth(shifted, w, tol, max_iter))
    return RootConfiguration(tuple(pieces), tag=infer_tag(r for r, _ in pieces))


def _radical_roots(a: complex, d: int, w: complex) -> list[complex]:
    if w == 0:
        return [a] * d
    rho = abs(w) ** (1.0 / d)
    base = cmath.phase(w) / (2 * math.pi * d)
    return [a + rho * unit_point(base + k / d) for k in range(d)]


def _aberth(coeffs: np.ndarray, target: complex, tol: float, max_iter: int) -> np.ndarray:
    n = coeffs.size - 1
    deriv = np.polyder(coeffs)
    magnitudes = np.abs(coeffs)
    nonzero = [magnitudes[k] ** (1.0 / k) for k in range(1, n + 1) if magnitudes[k] > 0]
    radius = max(nonzero, default=1.0) or 1.0
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(max_iter):
            f = np.polyval(coeffs, z)
            scale = np.polyval(magnitudes, np.abs(z))
            if np.all(np.abs(f) <= tol * scale):
                return z
            ratio = f / np.polyval(deriv, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
            z = z - np.where(np.isfinite(step), step, 0.0)
    raise RuntimeError(f"root finding did not converge for q(z) = {target!r}")
