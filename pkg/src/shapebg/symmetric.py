"""Largest background component that is symmetric about a center."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .bands import ConfidenceBand
from .decomposition import BackgroundDecomposition, normalized
from .density import DEFAULT_GRID_POINTS, DensityGrid, integrate, symmetric_points

_SYM_TOL = 1e-9


def is_symmetric_about(points: np.ndarray, center: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(points))))
    return bool(np.max(np.abs(points + points[::-1] - 2.0 * center)) <= _SYM_TOL * scale)


def _check(points, center):
    if not is_symmetric_about(points, center):
        raise ValueError(f"grid is not symmetric about center {center!r}")


def symmetric_minimum(f: DensityGrid, center: float) -> DensityGrid:
    """``min{f(t), f(2c - t)}`` on a grid mirrored about ``c``."""
    _check(f.points, center)
    return f.with_values(np.minimum(f.values, f.values[::-1]))


def extract_symmetric(f: DensityGrid, center: float = 0.0) -> BackgroundDecomposition:
    """Largest sub-density of ``f`` that is even about ``center``.

    Parameters
    ----------
    f : DensityGrid
        Density on a grid mirrored about ``center``, so ``t -> 2c - t`` maps
        grid points onto grid points.
    center : float

    Returns
    -------
    BackgroundDecomposition
        ``h0 = min{f(t), f(2c - t)}`` and ``pi0`` its trapezoid integral.
    """
    h0 = symmetric_minimum(f, center)
    pi0 = integrate(h0)
    return normalized(pi0, h0, "symmetric", center=float(center))


def _reflect_on_grid(f: DensityGrid, center: float) -> np.ndarray:
    """Values of ``f(2c - t)`` on the grid of ``f``, zero off the grid span."""
    pts = f.points
    mirrored = 2.0 * center - pts
    shift = (mirrored[0] - pts[0]) / f.spacing
    k = int(round(shift))
    if abs(shift - k) <= 1e-9 * max(1.0, abs(shift)):
        # mirrored[i] = pts[k - i]: exact index reflection
        idx = k - np.arange(pts.shape[0])
        ok = (idx >= 0) & (idx < pts.shape[0])
        out = np.zeros(pts.shape[0])
        out[ok] = f.values[idx[ok]]
        return out
    return np.interp(mirrored, pts, f.values, left=0.0, right=0.0)


def _candidate_on_grid(f: DensityGrid, center: float) -> BackgroundDecomposition:
    if is_symmetric_about(f.points, center):
        return extract_symmetric(f, center)
    h0 = f.with_values(np.minimum(f.values, _reflect_on_grid(f, center)))
    return normalized(integrate(h0), h0, "symmetric", center=float(center))


def _better(pi_new, c_new, pi_old, c_old) -> bool:
    tol = 1e-12 * max(1.0, abs(pi_old))
    if pi_new > pi_old + tol:
        return True
    if pi_new < pi_old - tol:
        return False
    return (abs(c_new), c_new) < (abs(c_old), c_old)


def search_center(f: DensityGrid | Callable, candidates: Sequence[float],
                  half_width: float | None = None, m: int = DEFAULT_GRID_POINTS):
    """Center maximizing ``pi0`` over ``candidates``.

    Parameters
    ----------
    f : DensityGrid or callable
        A grid is reflected in place (by index when the reflection lands on
        grid points, else by linear interpolation with zero outside the span).
        A callable ``f(points)`` is evaluated on a fresh grid of ``m`` points
        mirrored about each candidate, spanning ``c +- half_width``.
    candidates : sequence of float
    half_width : float, optional
        Required when ``f`` is callable.
    m : int

    Returns
    -------
    center : float
    decomposition : BackgroundDecomposition

    Notes
    -----
    Ties in ``pi0`` go to the smallest ``|c|``, then the smallest ``c``.
    """
    cands = np.atleast_1d(np.asarray(candidates, dtype=float))
    if cands.shape[0] == 0:
        raise ValueError("no candidate centers given")
    if not isinstance(f, DensityGrid):
        if half_width is None or not half_width > 0:
            raise ValueError("a positive half_width is needed for a callable density")
        func = f

        def evaluate(c):
            pts = symmetric_points(c, half_width, m)
            return extract_symmetric(DensityGrid(pts, func(pts)), c)
    else:
        def evaluate(c):
            return _candidate_on_grid(f, c)

    best = None
    for c in cands:
        dec = evaluate(float(c))
        if best is None or _better(dec.pi0, c, best[1].pi0, best[0]):
            best = (float(c), dec)
    return best


def symmetric_interval(band: ConfidenceBand, center: float = 0.0):
    """Bounds on ``pi0`` from a confidence band mirrored about ``center``.

    Returns
    -------
    pi_l, pi_u : float
        ``pi_l`` integrates the symmetric minimum of the lower curve, ``pi_u``
        that of the upper curve capped at 1.
    h_l, h_u : DensityGrid
    """
    h_l = symmetric_minimum(band.lower, center)
    h_u = symmetric_minimum(band.upper, center)
    return integrate(h_l), min(integrate(h_u), 1.0), h_l, h_u
