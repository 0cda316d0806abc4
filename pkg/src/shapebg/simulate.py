"""Ground-truth background proportions and Monte Carlo replication studies."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from functools import partial
from importlib import resources

import numpy as np

from .decomposition import BackgroundDecomposition
from .density import (MixtureSpec, Sample, eval_mixture, grid_from_mixture, load_mixture,
                      symmetric_points, DensityGrid)
from .logconcave import SolverFailure, extract_logconcave
from .monotone import extract_monotone
from .pipeline import FitOptions, fit
from .symmetric import extract_symmetric, search_center

log = logging.getLogger(__name__)

BUILTIN_MODELS = ("s1", "s2", "s3", "s4", "s5", "m1", "m2",
                  "l1", "l2", "l3", "l4", "l5", "gauss")
#: candidate centers for oracle searches: 0.01 apart on [-0.5, 0.5]
ORACLE_CENTERS = np.round(np.arange(-50, 51) * 0.01, 2)
ORACLE_POINTS = {"symmetric": 4001, "monotone": 4001, "logconcave": 801}
_RANGE_TAIL = 1e-6


def builtin_model(name: str) -> MixtureSpec:
    """One of the packaged simulation models, by case-insensitive name."""
    key = name.lower()
    if key not in BUILTIN_MODELS:
        raise KeyError(f"unknown model {name!r}; built-in models: {', '.join(BUILTIN_MODELS)}")
    text = resources.files("shapebg").joinpath("models", f"{key}.json").read_text("utf-8")
    return MixtureSpec.from_dict(json.loads(text))


def resolve_model(ref: str) -> MixtureSpec:
    """A built-in model name or a path to a JSON mixture spec."""
    if ref.lower() in BUILTIN_MODELS:
        return builtin_model(ref)
    return load_mixture(ref)


def sample_mixture(spec: MixtureSpec, n: int, seed=None) -> Sample:
    """``n`` i.i.d. draws: a component is picked by weight, then drawn from.

    Parameters
    ----------
    spec : MixtureSpec
    n : int
    seed : int, SeedSequence or Generator, optional
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights = np.array([c.weight for c in spec.components])
    labels = rng.choice(len(weights), size=n, p=weights / weights.sum())
    out = np.empty(n)
    for i, comp in enumerate(spec.components):
        idx = np.flatnonzero(labels == i)
        if idx.shape[0]:
            out[idx] = comp.draw(rng, idx.shape[0])
    return Sample(out, spec.support_lower)


def true_decomposition(spec: MixtureSpec, shape: str, center: float | None = 0.0,
                       center_search: bool = False, candidates=None,
                       resolution: int | None = None,
                       span: tuple[float, float] | None = None) -> BackgroundDecomposition:
    """Apply an extractor to the exact mixture density on a fine grid.

    Parameters
    ----------
    spec : MixtureSpec
    shape : {"symmetric", "monotone", "logconcave"}
    center : float, optional
        Center of symmetry (symmetric shape without search).
    center_search : bool
        Search ``candidates`` (default: 0.01 apart on [-0.5, 0.5]).
    resolution : int, optional
        Number of grid points; defaults depend on the shape.
    span : (float, float), optional
        Grid range; defaults to the mixture's central ``1 - 2e-6`` range.
    """
    m = resolution or ORACLE_POINTS.get(shape)
    if m is None:
        raise ValueError(f"unknown shape {shape!r}")
    lo, hi = span if span is not None else spec.quantile_range(_RANGE_TAIL)
    if shape == "symmetric":
        density = partial(eval_mixture, spec)
        if center_search:
            cands = ORACLE_CENTERS if candidates is None else np.asarray(candidates, float)
            half = max(abs(lo - cands.min()), abs(hi - cands.min()),
                       abs(lo - cands.max()), abs(hi - cands.max()))
            return search_center(density, cands, half_width=half, m=m)[1]
        c = 0.0 if center is None else float(center)
        half = max(abs(lo - c), abs(hi - c))
        pts = symmetric_points(c, half, m)
        return extract_symmetric(DensityGrid(pts, density(pts)), c)
    if shape == "monotone":
        start = spec.support_lower
        if start is None:
            raise ValueError("monotone shape needs a mixture whose support is bounded below")
        lo = start if span is None else lo
        return extract_monotone(grid_from_mixture(spec, lo, hi, m))
    if shape == "logconcave":
        return extract_logconcave(grid_from_mixture(spec, lo, hi, m))
    raise ValueError(f"unknown shape {shape!r}")


def true_pi0(spec: MixtureSpec, shape: str, **kwargs) -> float:
    """Background proportion of the exact mixture density; see :func:`true_decomposition`."""
    return true_decomposition(spec, shape, **kwargs).pi0


@dataclass(frozen=True)
class ReplicationSummary:
    """Aggregate of ``pi0`` estimates over Monte Carlo replicates.

    ``coverage_count`` counts replicates whose interval contained ``truth``;
    it is ``None`` when intervals were not computed.
    """

    estimator: str
    mean: float
    median: float
    sd: float
    reps: int
    coverage_count: int | None = None
    failures: int = 0
    truth: float | None = None
    mean_abs_error: float | None = None
    mean_pi_l: float | None = None
    mean_pi_u: float | None = None

    def __post_init__(self):
        if self.sd < 0:
            raise ValueError("sd must be nonnegative")
        if self.coverage_count is not None and not 0 <= self.coverage_count <= self.reps:
            raise ValueError("coverage count out of range")

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        """Aligned two-column text rendering."""
        rows = [(k, "-" if v is None else (f"{v:.4f}" if isinstance(v, float) else str(v)))
                for k, v in self.to_dict().items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


@dataclass(frozen=True)
class ReplicateResult:
    pi0: float
    pi_l: float | None
    pi_u: float | None


def replicate_seeds(seed, index: int):
    """``(sampling seed, bootstrap seed)`` for replicate ``index``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(int(index),))
    data_ss, boot_ss = ss.spawn(2)
    return data_ss, int(boot_ss.generate_state(1, dtype=np.uint64)[0])


def run_replicate(spec: MixtureSpec, options: FitOptions, n: int, seed, index: int):
    data_seed, boot_seed = replicate_seeds(seed, index)
    sample = sample_mixture(spec, n, data_seed)
    res = fit(sample, options, seed=boot_seed)
    return ReplicateResult(res.pi0, res.pi_l, res.pi_u)


def summarize(results, estimator: str, reps: int, failures: int,
              truth: float | None) -> ReplicationSummary:
    pi0 = np.sort([r.pi0 for r in results])
    if pi0.shape[0] == 0:
        nan = float("nan")
        return ReplicationSummary(estimator, nan, nan, 0.0, reps, None, failures, truth)
    sd = float(np.std(pi0, ddof=1)) if pi0.shape[0] > 1 else 0.0
    coverage = None
    mean_l = mean_u = None
    if all(r.pi_l is not None for r in results):
        coverage = None if truth is None else int(
            sum(r.pi_l <= truth <= r.pi_u for r in results))
        mean_l = float(np.mean(np.sort([r.pi_l for r in results])))
        mean_u = float(np.mean(np.sort([r.pi_u for r in results])))
    mae = None if truth is None else float(np.mean(np.sort(np.abs(pi0 - truth))))
    return ReplicationSummary(estimator, float(np.mean(pi0)), float(np.median(pi0)), sd, reps,
                              coverage, failures, truth, mae, mean_l, mean_u)


def run_replications(spec: MixtureSpec, shape: str, n: int, reps: int, alpha: float = 0.05,
                     seed: int = 0, center: float | None = None, center_search: bool = False,
                     intervals: bool = True, bootstrap: int = 500,
                     truth: float | None = None, **fit_kwargs) -> ReplicationSummary:
    """Monte Carlo study of the estimator of ``pi0``.

    Each replicate samples ``n`` points, fits the background with
    :func:`shapebg.pipeline.fit`, and records ``pi0`` and (when ``intervals``)
    the interval. Replicate ``i`` is seeded from ``(seed, i)`` only. Failed
    replicates are counted, not raised.

    Parameters
    ----------
    truth : float, optional
        Oracle value for coverage and error; computed with :func:`true_pi0`
        when omitted.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if truth is None:
        truth = true_pi0(spec, shape, center=center if center is not None else 0.0,
                         center_search=center_search)
    options = FitOptions(shape=shape, center=center, center_search=center_search,
                         alpha=alpha, bootstrap=bootstrap, intervals=intervals, **fit_kwargs)
    results = []
    failures = 0
    for i in range(reps):
        try:
            results.append(run_replicate(spec, options, n, seed, i))
        except (ValueError, SolverFailure) as exc:
            failures += 1
            log.warning("replicate %d failed: %s", i, exc)
    name = f"{shape}" + ("-searched" if center_search else "")
    return summarize(results, name, reps, failures, truth)
