"""Densities on equispaced grids, kernel estimates and exact mixture densities.

Everything downstream works on a :class:`DensityGrid`: a strictly increasing,
equispaced set of points with nonnegative density values attached.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from . import _kernels

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_4PI = math.sqrt(4.0 * math.pi)

#: guard against 0/0 in far tails when forming ratios of densities
EPS_DIV = 1e-12
DEFAULT_GRID_POINTS = 2001
#: grids extend this many bandwidths past the data range
GRID_PAD = 5.0


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DensityGrid:
    """Nonnegative density values on an equispaced grid.

    Parameters
    ----------
    points : array-like
        Strictly increasing, equispaced abscissae (at least two).
    values : array-like
        Density values at ``points``; must be nonnegative and finite.
    """

    points: np.ndarray
    values: np.ndarray
    spacing: float = field(init=False)

    def __post_init__(self):
        pts = _frozen(self.points)
        vals = _frozen(self.values)
        if pts.ndim != 1 or pts.shape[0] < 2:
            raise ValueError("a density grid needs at least two points")
        if vals.shape != pts.shape:
            raise ValueError(f"values have shape {vals.shape}, points {pts.shape}")
        steps = np.diff(pts)
        spacing = (pts[-1] - pts[0]) / (pts.shape[0] - 1)
        if not spacing > 0:
            raise ValueError("grid points must be strictly increasing")
        if np.max(np.abs(steps - spacing)) > 1e-9 * max(spacing, np.max(np.abs(pts))):
            raise ValueError("grid points are not equispaced")
        if not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite")
        if np.any(vals < 0):
            raise ValueError(f"density values must be nonnegative (min {vals.min():.3g})")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "spacing", float(spacing))

    def __len__(self):
        return self.points.shape[0]

    def with_values(self, values) -> "DensityGrid":
        return DensityGrid(self.points, values)

    def same_points(self, other: "DensityGrid", rtol: float = 1e-12) -> bool:
        if len(self) != len(other):
            return False
        scale = max(1.0, float(np.max(np.abs(self.points))))
        return bool(np.max(np.abs(self.points - other.points)) <= rtol * scale)


@dataclass(frozen=True)
class Sample:
    """Observed data, optionally known to live on ``[support_lower, inf)``."""

    values: np.ndarray
    support_lower: float | None = None

    def __post_init__(self):
        vals = _frozen(np.ravel(self.values))
        if vals.shape[0] == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample contains non-finite values")
        if self.support_lower is not None:
            below = vals < self.support_lower
            if np.any(below):
                bad = float(vals[np.argmax(below)])
                raise ValueError(
                    f"sample value {bad!r} lies below the support start {self.support_lower!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]


# --------------------------------------------------------------------------
# Parametric mixtures (simulation ground truth)
# --------------------------------------------------------------------------

_FAMILIES = {
    "normal": ("mu", "sigma"),
    "gamma": ("shape", "scale"),
    "exponential": ("scale",),
    "student_t": ("df",),
    "uniform": ("a", "b"),
}


@dataclass(frozen=True)
class Component:
    family: str
    weight: float
    params: dict

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {sorted(_FAMILIES)}")
        missing = [p for p in _FAMILIES[self.family] if p not in self.params]
        if missing:
            raise ValueError(f"{self.family} component is missing {missing}")
        p = {k: float(self.params[k]) for k in _FAMILIES[self.family]}
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "weight", float(self.weight))
        if not self.weight > 0:
            raise ValueError("component weights must be positive")
        for key in ("sigma", "scale", "shape", "df"):
            if key in p and not p[key] > 0:
                raise ValueError(f"{self.family} parameter {key} must be positive")
        if self.family == "uniform" and not p["b"] > p["a"]:
            raise ValueError("uniform component needs b > a")

    def dist(self):
        p = self.params
        if self.family == "normal":
            return stats.norm(loc=p["mu"], scale=p["sigma"])
        if self.family == "gamma":
            return stats.gamma(p["shape"], scale=p["scale"])
        if self.family == "exponential":
            return stats.expon(scale=p["scale"])
        if self.family == "student_t":
            return stats.t(p["df"])
        return stats.uniform(loc=p["a"], scale=p["b"] - p["a"])

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.family == "normal":
            return rng.normal(p["mu"], p["sigma"], size)
        if self.family == "gamma":
            return rng.gamma(p["shape"], p["scale"], size)
        if self.family == "exponential":
            return rng.exponential(p["scale"], size)
        if self.family == "student_t":
            return rng.standard_t(p["df"], size)
        return rng.uniform(p["a"], p["b"], size)

    @property
    def support_lower(self) -> float | None:
        if self.family in ("gamma", "exponential"):
            return 0.0
        if self.family == "uniform":
            return self.params["a"]
        return None


@dataclass(frozen=True)
class MixtureSpec:
    """Weighted list of parametric components.

    Serializes as ``{"components": [{"family": "normal", "mu": 0, "sigma": 1,
    "weight": 0.85}, ...]}``.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_dict(cls, data: dict) -> "MixtureSpec":
        comps = []
        for entry in data["components"]:
            entry = dict(entry)
            family = entry.pop("family")
            weight = entry.pop("weight")
            comps.append(Component(family, weight, entry))
        return cls(tuple(comps))

    def to_dict(self) -> dict:
        return {"components": [{"family": c.family, **c.params, "weight": c.weight}
                               for c in self.components]}

    @property
    def support_lower(self) -> float | None:
        lows = [c.support_lower for c in self.components]
        if any(lo is None for lo in lows):
            return None
        return min(lows)

    def quantile_range(self, tail: float = 1e-8) -> tuple[float, float]:
        """Interval holding all but ``tail`` of every component's mass on each side."""
        lo = min(c.dist().ppf(tail) for c in self.components)
        hi = max(c.dist().isf(tail) for c in self.components)
        if self.support_lower is not None:
            lo = self.support_lower
        return float(lo), float(hi)


def mixture(*parts) -> MixtureSpec:
    """Shorthand: ``mixture((0.85, "normal", dict(mu=0, sigma=1)), ...)``."""
    return MixtureSpec(tuple(Component(fam, w, params) for w, fam, params in parts))


def load_mixture(path) -> MixtureSpec:
    with open(path, encoding="utf-8") as fh:
        return MixtureSpec.from_dict(json.load(fh))


def save_mixture(spec: MixtureSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")


def eval_mixture(spec: MixtureSpec, x):
    """Mixture density at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    for comp in spec.components:
        out = out + comp.weight * comp.dist().pdf(x)
    return float(out) if out.ndim == 0 else out


def equispaced(lo: float, hi: float, m: int) -> np.ndarray:
    if not hi > lo:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if m < 2:
        raise ValueError("need at least two grid points")
    return np.linspace(lo, hi, int(m))


def symmetric_points(center: float, half_width: float, m: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Equispaced points mirrored exactly about ``center``."""
    offsets = np.linspace(-half_width, half_width, int(m))
    offsets = 0.5 * (offsets - offsets[::-1])
    return center + offsets


def grid_from_mixture(spec: MixtureSpec, lo: float, hi: float, m: int) -> DensityGrid:
    pts = equispaced(lo, hi, m)
    return DensityGrid(pts, eval_mixture(spec, pts))


def grid_from_callable(density: Callable, points) -> DensityGrid:
    points = np.asarray(points, dtype=float)
    return DensityGrid(points, np.asarray(density(points), dtype=float))


# --------------------------------------------------------------------------
# Kernel density estimation
# --------------------------------------------------------------------------

def gaussian_kde(sample: Sample, bandwidth: float, points) -> DensityGrid:
    """Gaussian kernel estimate ``(1/(n h)) sum_i phi((t - x_i)/h)`` on ``points``."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    points = np.asarray(points, dtype=float)
    x = np.sort(sample.values)
    sums = _kernels.kde_sum(np.ascontiguousarray(x), np.ascontiguousarray(points), float(bandwidth))
    return DensityGrid(points, sums / (x.shape[0] * bandwidth * SQRT_2PI))


def reflected_kde(sample: Sample, boundary: float, bandwidth: float, points) -> DensityGrid:
    """Kernel estimate on ``[boundary, inf)`` with the data mirrored about ``boundary``.

    The estimate is twice the plain estimate of the augmented sample
    ``{x_i} U {2 boundary - x_i}``, so it carries unit mass on the half-line.
    """
    x = sample.values
    if np.any(x < boundary):
        bad = float(x[np.argmax(x < boundary)])
        raise ValueError(f"sample value {bad!r} lies below the boundary {boundary!r}")
    points = np.asarray(points, dtype=float)
    if np.any(points < boundary - 1e-12 * max(1.0, abs(boundary))):
        raise ValueError("grid points must not lie below the boundary")
    augmented = Sample(np.concatenate([x, 2.0 * boundary - x]))
    plain = gaussian_kde(augmented, bandwidth, points)
    return plain.with_values(2.0 * plain.values)


def silverman_bandwidth(values) -> float:
    """Silverman's rule of thumb, ``0.9 min(sd, IQR/1.34) n^(-1/5)``."""
    x = np.asarray(values, dtype=float)
    n = x.shape[0]
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if not spread > 0:
        raise ValueError("degenerate sample: all values are equal")
    return 0.9 * spread * n ** (-0.2)


def default_bandwidth_candidates(sample: Sample, count: int = 40) -> np.ndarray:
    """``count`` log-spaced bandwidths spanning [0.1, 4] times Silverman's rule."""
    return silverman_bandwidth(sample.values) * np.geomspace(0.1, 4.0, count)


def lscv_scores(sample: Sample, candidates) -> np.ndarray:
    """Least-squares cross-validation criterion for each candidate bandwidth.

    When ``sample.support_lower`` is set the criterion is the one of the
    reflected estimator on ``[support_lower, inf)``.
    """
    h = np.asarray(candidates, dtype=float)
    if h.ndim != 1 or h.shape[0] == 0 or np.any(h <= 0):
        raise ValueError("candidates must be a non-empty vector of positive bandwidths")
    x = np.sort(sample.values)
    n = x.shape[0]
    if n < 2 or x[0] == x[-1]:
        raise ValueError("degenerate sample: all values are equal")
    reflect = sample.support_lower is not None
    if reflect:
        x = x - sample.support_lower
    order = np.argsort(-h, kind="stable")
    sums = np.empty((h.shape[0], 5))
    sums[order] = _kernels.lscv_pair_sums(np.ascontiguousarray(x),
                                          np.ascontiguousarray(h[order]), reflect)
    a_m, b_m, a_p, b_p, d_p = sums.T
    c1 = 1.0 / SQRT_2PI
    c2 = 1.0 / SQRT_4PI
    if not reflect:
        return c2 * (n + 2.0 * a_m) / (n * n * h) - 4.0 * c1 * b_m / (n * (n - 1) * h)
    square = c2 * ((n + 2.0 * a_m) + (d_p + 2.0 * a_p)) / (n * n * h)
    return square - 4.0 * c1 * (b_m + b_p) / (n * (n - 1) * h)


def select_bandwidth_lscv(sample: Sample, candidates=None) -> float:
    """Candidate bandwidth minimizing the LSCV criterion; ties go to the larger one."""
    if candidates is None:
        candidates = default_bandwidth_candidates(sample)
    h = np.asarray(candidates, dtype=float)
    if h.shape[0] == 1:
        if not h[0] > 0:
            raise ValueError("bandwidth candidates must be positive")
        return float(h[0])
    if len(sample) < 10:
        raise ValueError("cross-validation needs at least 10 observations")
    scores = lscv_scores(sample, h)
    best = scores.min()
    tied = h[scores == best]
    return float(tied.max())


# --------------------------------------------------------------------------
# Integration and ratio utilities
# --------------------------------------------------------------------------

def integrate(grid: DensityGrid) -> float:
    """Trapezoid rule over the grid."""
    return float(trapezoid(grid.values, grid.points))


def resample(grid: DensityGrid, m: int) -> DensityGrid:
    """Linear interpolation onto ``m`` equispaced points over the same span."""
    pts = np.linspace(grid.points[0], grid.points[-1], int(m))
    return DensityGrid(pts, np.interp(pts, grid.points, grid.values))


def theta0_plugin(f: DensityGrid, g0: DensityGrid) -> float:
    """Grid plug-in for ``sup{t : f >= t g0}`` with a known background ``g0``."""
    if not f.same_points(g0):
        raise ValueError("f and g0 must share grid points")
    mass = integrate(g0)
    if abs(mass - 1.0) > 1e-3:
        raise ValueError(f"g0 integrates to {mass:.6f}, expected 1")
    live = g0.values > EPS_DIV
    if not np.any(live):
        raise ValueError("g0 vanishes on the whole grid")
    ratio = float(np.min(f.values[live] / g0.values[live]))
    return min(1.0, max(0.0, ratio))


def data_range_points(sample: Sample, bandwidth: float, m: int = DEFAULT_GRID_POINTS,
                      lower: float | None = None) -> np.ndarray:
    """Grid from ``min - 5h`` (or ``lower``) to ``max + 5h``."""
    lo = sample.values.min() - GRID_PAD * bandwidth if lower is None else lower
    hi = sample.values.max() + GRID_PAD * bandwidth
    return equispaced(lo, hi, m)


def standard_normal_grid(points) -> DensityGrid:
    """Standard normal density on ``points``, renormalized to unit trapezoid mass."""
    points = np.asarray(points, dtype=float)
    vals = np.exp(-0.5 * points * points) / SQRT_2PI
    mass = trapezoid(vals, points)
    if mass > 0:
        vals = vals / mass
    return DensityGrid(points, vals)


__all__: Sequence[str] = [
    "DensityGrid", "Sample", "Component", "MixtureSpec", "mixture", "load_mixture",
    "save_mixture", "eval_mixture", "grid_from_mixture", "grid_from_callable", "equispaced",
    "symmetric_points", "gaussian_kde", "reflected_kde", "silverman_bandwidth",
    "default_bandwidth_candidates", "lscv_scores", "select_bandwidth_lscv", "integrate",
    "resample", "theta0_plugin", "data_range_points", "standard_normal_grid", "EPS_DIV",
]
