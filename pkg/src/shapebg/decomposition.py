"""Container for the output of every extractor."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .density import DensityGrid, standard_normal_grid

SHAPES = ("symmetric", "monotone", "logconcave")


@dataclass(frozen=True)
class BackgroundDecomposition:
    """Background proportion ``pi0`` with its sub-density ``h0`` and density ``g0``.

    ``g0 = h0 / pi0`` when ``pi0 > 0``; otherwise ``g0`` is the standard normal
    on the same grid.
    """

    pi0: float
    h0: DensityGrid
    g0: DensityGrid
    shape: str
    center: float | None = None
    report: Any = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValueError(f"pi0 = {self.pi0!r} is outside [0, 1]")
        if not self.h0.same_points(self.g0):
            raise ValueError("h0 and g0 must share grid points")


def normalized(pi0: float, h0: DensityGrid, shape: str, center: float | None = None,
               report: Any = None, mass: float | None = None) -> BackgroundDecomposition:
    """Build a decomposition, dividing ``h0`` by ``mass`` (default ``pi0``)."""
    mass = pi0 if mass is None else mass
    if pi0 > 0 and mass > 0:
        g0 = h0.with_values(h0.values / mass)
    else:
        g0 = standard_normal_grid(h0.points)
    pi0 = float(min(1.0, max(0.0, pi0)))
    return BackgroundDecomposition(pi0, h0, g0, shape, center, report)


def clamp_unit(x: float) -> float:
    return float(np.clip(x, 0.0, 1.0))
