"""Largest non-increasing background component on a half-line."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .bands import ConfidenceBand
from .decomposition import BackgroundDecomposition, normalized
from .density import DensityGrid, integrate


def running_minimum(f: DensityGrid) -> DensityGrid:
    """``min{f(s) : s <= t}`` at every grid point."""
    return f.with_values(np.minimum.accumulate(f.values))


def extract_monotone(f: DensityGrid) -> BackgroundDecomposition:
    """Largest non-increasing sub-density of ``f``.

    The grid is taken to start at the support's lower end; ``h0`` is the running
    minimum of ``f`` from the left and ``pi0`` its trapezoid integral.

    Examples
    --------
    >>> import numpy as np
    >>> f = DensityGrid(np.linspace(0, 3, 4), [1.0, 0.2, 0.5, 0.1])
    >>> extract_monotone(f).h0.values.tolist()
    [1.0, 0.2, 0.2, 0.1]
    """
    h0 = running_minimum(f)
    return normalized(integrate(h0), h0, "monotone", center=float(f.points[0]))


def monotone_interval(band: ConfidenceBand):
    """Bounds on ``pi0`` from running minima of the band curves.

    Returns
    -------
    pi_l, pi_u : float
    h_l, h_u : DensityGrid
    """
    h_l = running_minimum(band.lower)
    h_u = running_minimum(band.upper)
    return integrate(h_l), min(integrate(h_u), 1.0), h_l, h_u


def _from_start(f: DensityGrid, start: float) -> BackgroundDecomposition:
    i = int(np.searchsorted(f.points, start - 1e-12 * max(1.0, abs(start))))
    if i >= len(f) - 1:
        raise ValueError(f"support start {start!r} leaves fewer than two grid points")
    vals = np.zeros(len(f))
    vals[i:] = np.minimum.accumulate(f.values[i:])
    h0 = f.with_values(vals)
    return normalized(integrate(h0), h0, "monotone", center=float(f.points[i]))


def search_support_start(f: DensityGrid, candidates: Sequence[float]):
    """Support start maximizing ``pi0`` when it is not known in advance.

    For each candidate ``a`` the background is zero before ``a`` and the running
    minimum of ``f`` from ``a`` on. Ties go to the smallest ``|a|``, then the
    smallest ``a``.

    Returns
    -------
    start : float
    decomposition : BackgroundDecomposition
    """
    cands = np.atleast_1d(np.asarray(candidates, dtype=float))
    if cands.shape[0] == 0:
        raise ValueError("no candidate support starts given")
    best = None
    for a in cands:
        dec = _from_start(f, float(a))
        if best is None:
            best = (float(a), dec)
            continue
        tol = 1e-12 * max(1.0, best[1].pi0)
        if dec.pi0 > best[1].pi0 + tol or (
                dec.pi0 >= best[1].pi0 - tol and (abs(a), a) < (abs(best[0]), best[0])):
            best = (float(a), dec)
    return best
