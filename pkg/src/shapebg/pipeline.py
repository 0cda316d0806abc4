"""Sample to background decomposition: bandwidth, estimate, extraction, band, interval."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bands import UNDERSMOOTH, ConfidenceBand, bootstrap_band
from .decomposition import BackgroundDecomposition, SHAPES
from .density import (DEFAULT_GRID_POINTS, GRID_PAD, DensityGrid, Sample, data_range_points,
                      gaussian_kde, reflected_kde, select_bandwidth_lscv, silverman_bandwidth,
                      symmetric_points)
from .logconcave import (DEFAULT_D, MAX_VARIABLES, extract_logconcave, logconcave_interval,
                         points_for_range)
from .monotone import extract_monotone, monotone_interval
from .symmetric import extract_symmetric, symmetric_interval

log = logging.getLogger(__name__)

CENTER_CANDIDATES = 101
START_CANDIDATES = 21


@dataclass
class FitOptions:
    """Settings for :func:`fit`; ``None`` means the documented default."""

    shape: str = "symmetric"
    center: float | None = None
    center_search: bool = False
    center_candidates: np.ndarray | None = None
    support_start: float | None = None
    support_search: bool = False
    start_candidates: np.ndarray | None = None
    alpha: float = 0.05
    bootstrap: int = 500
    bandwidth: float | None = None
    grid_points: int = DEFAULT_GRID_POINTS
    d: float = DEFAULT_D
    objective: str = "exact"
    seed: int | None = None
    intervals: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.grid_points < 3:
            raise ValueError("need at least three grid points")


@dataclass
class FitResult:
    shape: str
    pi0: float
    bandwidth: float
    f_hat: DensityGrid
    decomposition: BackgroundDecomposition
    center: float | None = None
    pi_l: float | None = None
    pi_u: float | None = None
    h_l: DensityGrid | None = None
    h_u: DensityGrid | None = None
    band: ConfidenceBand | None = field(default=None, repr=False)

    @property
    def points(self) -> np.ndarray:
        return self.f_hat.points


def default_center_candidates(values, count: int = CENTER_CANDIDATES) -> np.ndarray:
    """Equispaced centers between the 40th and 60th sample percentiles."""
    lo, hi = np.percentile(values, [40, 60])
    return np.linspace(lo, hi, count)


def default_start_candidates(values, count: int = START_CANDIDATES) -> np.ndarray:
    """Support starts from ``min - 2 h_s`` up to the sample minimum (``h_s`` Silverman)."""
    x_min = float(np.min(values))
    return np.linspace(x_min - 2.0 * silverman_bandwidth(values), x_min, count)


def _symmetric_grid(sample, center, h, m):
    half = float(np.max(np.abs(sample.values - center))) + GRID_PAD * h
    return symmetric_points(center, half, m)


def _fit_symmetric(sample, opts):
    h = opts.bandwidth or select_bandwidth_lscv(sample)
    if opts.center_search:
        cands = opts.center_candidates
        if cands is None:
            cands = default_center_candidates(sample.values)
        best = None
        for c in np.asarray(cands, dtype=float):
            pts = _symmetric_grid(sample, c, h, opts.grid_points)
            f_hat = gaussian_kde(sample, h, pts)
            dec = extract_symmetric(f_hat, c)
            tol = 1e-12
            if best is None or dec.pi0 > best[1].pi0 + tol or (
                    dec.pi0 >= best[1].pi0 - tol and (abs(c), c) < (abs(best[0]), best[0])):
                best = (float(c), dec, f_hat)
        center, dec, f_hat = best
    else:
        center = 0.0 if opts.center is None else float(opts.center)
        f_hat = gaussian_kde(sample, h, _symmetric_grid(sample, center, h, opts.grid_points))
        dec = extract_symmetric(f_hat, center)
    result = FitResult("symmetric", dec.pi0, h, f_hat, dec, center=center)
    if opts.intervals:
        band = bootstrap_band(sample, f_hat.points, opts.alpha, opts.bootstrap,
                              UNDERSMOOTH * h, seed=opts.seed)
        result.pi_l, result.pi_u, result.h_l, result.h_u = symmetric_interval(band, center)
        result.band = band
    return result


def _check_start(sample, start):
    below = sample.values < start
    if np.any(below):
        bad = float(sample.values[np.argmax(below)])
        raise ValueError(f"sample value {bad!r} lies below the support start {start!r}; "
                         "pass a smaller support start")


def _monotone_at(sample, start, h, m):
    pts = data_range_points(sample, h, m, lower=start)
    f_hat = reflected_kde(sample, start, h, pts)
    return f_hat, extract_monotone(f_hat)


def _fit_monotone(sample, opts):
    if opts.support_search:
        cands = opts.start_candidates
        if cands is None:
            cands = default_start_candidates(sample.values)
        cands = np.asarray(cands, dtype=float)
        _check_start(sample, float(cands.min()))
        h = opts.bandwidth or select_bandwidth_lscv(Sample(sample.values, float(cands.min())))
        best = None
        for a in cands:
            f_hat, dec = _monotone_at(sample, float(a), h, opts.grid_points)
            tol = 1e-12
            if best is None or dec.pi0 > best[2].pi0 + tol or (
                    dec.pi0 >= best[2].pi0 - tol and (abs(a), a) < (abs(best[0]), best[0])):
                best = (float(a), f_hat, dec)
        start, f_hat, dec = best
    else:
        start = 0.0 if opts.support_start is None else float(opts.support_start)
        _check_start(sample, start)
        h = opts.bandwidth or select_bandwidth_lscv(Sample(sample.values, start))
        f_hat, dec = _monotone_at(sample, start, h, opts.grid_points)
    result = FitResult("monotone", dec.pi0, h, f_hat, dec, center=start)
    if opts.intervals:
        band = bootstrap_band(sample, f_hat.points, opts.alpha, opts.bootstrap,
                              UNDERSMOOTH * h, boundary=start, seed=opts.seed)
        result.pi_l, result.pi_u, result.h_l, result.h_u = monotone_interval(band)
        result.band = band
    return result


def _fit_logconcave(sample, opts):
    h = opts.bandwidth or select_bandwidth_lscv(sample)
    lo = float(sample.values.min()) - GRID_PAD * h
    hi = float(sample.values.max()) + GRID_PAD * h
    pts = points_for_range(lo, hi, max_points=min(MAX_VARIABLES, opts.grid_points))
    f_hat = gaussian_kde(sample, h, pts)
    solver = {"d": opts.d, "objective": opts.objective}
    dec = extract_logconcave(f_hat, **solver)
    result = FitResult("logconcave", dec.pi0, h, f_hat, dec)
    if opts.intervals:
        band = bootstrap_band(sample, pts, opts.alpha, opts.bootstrap, UNDERSMOOTH * h,
                              seed=opts.seed)
        result.pi_l, result.pi_u, result.h_l, result.h_u = logconcave_interval(band, **solver)
        result.band = band
    return result


_FITTERS = {"symmetric": _fit_symmetric, "monotone": _fit_monotone,
            "logconcave": _fit_logconcave}


def fit(sample: Sample, options: FitOptions | None = None, **kwargs) -> FitResult:
    """Estimate the background decomposition of ``sample`` and, optionally, a
    confidence interval for ``pi0``.

    Keyword arguments override fields of ``options``.

    Examples
    --------
    >>> import numpy as np
    >>> s = Sample(np.random.default_rng(3).normal(size=300))
    >>> r = fit(s, shape="symmetric", center=0.0, intervals=False)
    >>> 0.8 < r.pi0 <= 1.0
    True
    """
    if options is None:
        options = FitOptions(**kwargs)
    elif kwargs:
        options = FitOptions(**{**options.__dict__, **kwargs})
    log.info("fitting %s background to %d observations", options.shape, len(sample))
    return _FITTERS[options.shape](sample, options)
