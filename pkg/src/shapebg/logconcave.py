"""Largest log-concave background component.

The background ``h0 = exp(v)`` is sought among exponentials of concave,
piecewise-linear functions ``v`` on the grid with ``v <= log f``. Its mass is
either the exact integral of ``exp`` of the linear interpolant (``"exact"``)
or the trapezoid rule applied to ``exp(v)`` (``"riemann"``).

The objective is convex in ``v``, so maximizing its linearization over the
feasible polytope never decreases it. :func:`solve` iterates that step (one
linear program per iteration) from several starting points and keeps the best.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import trapezoid
from scipy.optimize import linprog

from . import _kernels
from .bands import ConfidenceBand
from .decomposition import BackgroundDecomposition, normalized
from .density import DensityGrid, resample

#: grid points with density below this are outside the problem domain
POSITIVITY_FLOOR = 1e-12
DEFAULT_D = 0.02
DEFAULT_TOL = 1e-8
DEFAULT_RTOL = 1e-6
DEFAULT_MAX_ITER = 500
#: target grid spacing and cap on the number of variables for sample-based fits
TARGET_SPACING = 0.02
MAX_VARIABLES = 1001
OBJECTIVES = ("exact", "riemann")

_SERIES_CUT = 1e-2
_TRUNCATION_MASS = (0.50, 0.80, 0.95)
_START_SHIFT = 1.0
_TRUNCATION_DROP = 30.0
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


# --------------------------------------------------------------------------
# Objective pieces
# --------------------------------------------------------------------------

def lambda_segment(x, y):
    """Mean of ``exp`` over a unit segment whose endpoint logs are ``x`` and ``y``.

    ``(e^x - e^y) / (x - y)``, or ``e^x`` when ``x == y``. Accepts arrays.

    Examples
    --------
    >>> round(float(lambda_segment(0.0, math.log(2.0))), 6)
    1.442695
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.abs(x - y)
    small = d < 1e-8
    safe = np.where(small, 1.0, d)
    top = np.maximum(x, y)
    out = np.where(small, np.exp(0.5 * (x + y)) * (1.0 + d * d / 24.0),
                   np.exp(top) * (-np.expm1(-safe)) / safe)
    return float(out) if out.ndim == 0 else out


def _phi1(d):
    """``(d e^d - e^d + 1) / d^2``, the scaled derivative of ``(e^d - 1)/d``."""
    d = np.asarray(d, dtype=float)
    small = np.abs(d) < _SERIES_CUT
    safe = np.where(small, 1.0, d)
    direct = (safe * np.exp(safe) - np.expm1(safe)) / (safe * safe)
    # sum_k (k+1) d^k / (k+2)!
    series = np.zeros_like(d)
    power = np.ones_like(d)
    for k in range(9):
        series = series + (k + 1) * power / math.factorial(k + 2)
        power = power * d
    return np.where(small, series, direct)


def lambda_grad(x, y):
    """Partial derivatives ``(d/dx, d/dy)`` of :func:`lambda_segment`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # lambda = e^y (e^(x-y) - 1)/(x-y); evaluate from the smaller endpoint
    gx = np.exp(y) * _phi1(x - y)
    gy = np.exp(x) * _phi1(y - x)
    return gx, gy


def objective_exact(v, delta: float) -> float:
    """``delta * sum_j lambda(v_j, v_{j+1})``: exact integral of exp of the interpolant."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] < 2:
        raise ValueError("need at least two values")
    return float(delta * np.sum(lambda_segment(v[:-1], v[1:])))


def gradient_exact(v, delta: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    gx, gy = lambda_grad(v[:-1], v[1:])
    g = np.zeros(v.shape[0])
    g[:-1] += gx
    g[1:] += gy
    return delta * g


def objective_riemann(v, delta: float) -> float:
    """Trapezoid rule applied to ``exp(v)``."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] < 2:
        raise ValueError("need at least two values")
    e = np.exp(v)
    return float(delta * (e.sum() - 0.5 * (e[0] + e[-1])))


def gradient_riemann(v, delta: float) -> np.ndarray:
    g = np.exp(np.asarray(v, dtype=float))
    g[0] *= 0.5
    g[-1] *= 0.5
    return delta * g


_OBJ = {"exact": (objective_exact, gradient_exact),
        "riemann": (objective_riemann, gradient_riemann)}


def _objective_pair(kind):
    if kind not in _OBJ:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {kind!r}")
    return _OBJ[kind]


# --------------------------------------------------------------------------
# Problem
# --------------------------------------------------------------------------

def second_difference(n: int) -> sparse.csr_matrix:
    """Rows ``v_{j-1} - 2 v_j + v_{j+1}`` for the interior points."""
    if n < 3:
        return sparse.csr_matrix((0, n))
    ones = np.ones(n - 2)
    return sparse.diags([ones, -2.0 * ones, ones], [0, 1, 2], shape=(n - 2, n), format="csr")


@dataclass(frozen=True)
class LogConcaveProblem:
    """Discretized problem ``max objective(v)`` subject to ``A v >= b``.

    The first ``n - 2`` rows of ``A`` are concavity rows
    ``-v_{j+1} + 2 v_j - v_{j-1} >= 0``; the last ``n`` rows are the bounds
    ``-v_j >= -u_j``.

    Attributes
    ----------
    points : ndarray
        Equispaced grid (the trimmed support of ``f``).
    u : ndarray
        ``log f`` on ``points``.
    v_init : ndarray
        ``u - d``.
    d : float
    offset : int
        Index of ``points[0]`` in the grid the problem was built from.
    """

    points: np.ndarray
    u: np.ndarray
    v_init: np.ndarray
    d: float
    offset: int = 0
    A: sparse.csr_matrix = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.points.shape[0]
        if n < 2:
            raise ValueError("need at least two grid points")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("log density must be finite on the problem domain")
        conc = -second_difference(n)
        bound = -sparse.identity(n, format="csr")
        object.__setattr__(self, "A", sparse.vstack([conc, bound], format="csr"))
        object.__setattr__(self, "b", np.concatenate([np.zeros(conc.shape[0]), -self.u]))

    @property
    def spacing(self) -> float:
        return float((self.points[-1] - self.points[0]) / (self.points.shape[0] - 1))

    def violation(self, v) -> float:
        """Largest violation of ``A v >= b`` (zero when feasible)."""
        return float(max(0.0, np.max(self.b - self.A @ v)))


def positive_runs(values, floor: float = POSITIVITY_FLOOR):
    """``(start, stop)`` index ranges of maximal runs with ``values > floor``."""
    pos = np.concatenate([[False], np.asarray(values) > floor, [False]])
    edges = np.flatnonzero(np.diff(pos.astype(np.int8)))
    return [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


def build_problem(f: DensityGrid, d: float = DEFAULT_D) -> LogConcaveProblem:
    """Problem for ``f`` with the near-zero ends of the grid trimmed away.

    Raises
    ------
    ValueError
        If ``f`` is zero everywhere, or falls below the positivity floor strictly
        inside its support (use :func:`extract_logconcave` to handle that case).
    """
    if not d > 0:
        raise ValueError("initialization offset d must be positive")
    runs = positive_runs(f.values)
    if not runs:
        raise ValueError("density is zero on the whole grid")
    if len(runs) > 1:
        raise ValueError("density vanishes inside its support; split the domain first")
    start, stop = runs[0]
    if stop - start < 2:
        raise ValueError("support holds fewer than two grid points")
    u = np.log(f.values[start:stop])
    return LogConcaveProblem(np.array(f.points[start:stop]), u, u - d, float(d), start)


# --------------------------------------------------------------------------
# Solver
# --------------------------------------------------------------------------

@dataclass
class SolverReport:
    """Outcome of :func:`solve`.

    ``objective_init`` is the objective at the first feasible iterate of the
    winning start; ``start`` is that start's index.
    """

    v_star: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float
    feasibility_violation: float
    converged: bool
    objective_init: float = float("nan")
    start: int = 0
    objective_kind: str = "exact"
    history: list = field(default_factory=list)
    #: index range of the solved run within the caller's grid, and its problem
    run: tuple | None = None
    problem: LogConcaveProblem | None = None


def _lp_step(grad, D, u):
    n = u.shape[0]
    scale = float(np.max(grad))
    cost = -grad / scale if scale > 0 else -np.ones(n)
    kwargs = {}
    if D.shape[0]:
        kwargs = {"A_ub": D, "b_ub": np.zeros(D.shape[0])}
    res = linprog(cost, bounds=np.column_stack([np.full(n, -np.inf), u]), method="highs",
                  options=_LP_OPTIONS, **kwargs)
    if res.status != 0:
        return None
    lam_c = -res.ineqlin.marginals * scale if D.shape[0] else np.zeros(0)
    lam_u = -res.upper.marginals * scale
    return np.minimum(res.x, u), lam_c, lam_u


def _kkt(grad, v, u, D, lam_c, lam_u):
    station = grad - (D.T @ lam_c if D.shape[0] else 0.0) - lam_u
    scale = max(1.0, float(np.max(np.abs(grad))))
    comp_c = float(np.max(np.abs(lam_c * (D @ v)))) if D.shape[0] else 0.0
    comp_u = float(np.max(np.abs(lam_u * (u - v))))
    return float(np.max(np.abs(station))) / scale + comp_c + comp_u


def _run(problem, v0, kind, tol, rtol, max_iter):
    """Successive linearization from ``v0``; returns a report for this start."""
    obj, grad_fn = _objective_pair(kind)
    u = problem.u
    D = second_difference(u.shape[0])
    delta = problem.spacing
    v = np.array(v0, dtype=float)
    feasible = problem.violation(v) <= tol
    history = [obj(v, delta)] if feasible else []
    best_v = v.copy() if feasible else None
    kkt = float("inf")
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        g = grad_fn(v, delta)
        step = _lp_step(g, D, u)
        if step is None:
            break
        w, lam_c, lam_u = step
        if feasible:
            kkt = _kkt(g, v, u, D, lam_c, lam_u)
        val = obj(w, delta)
        if problem.violation(w) > tol:
            break
        prev = history[-1] if history else None
        if prev is not None and val < prev:
            # rounding in the LP; keep the better iterate and stop
            converged = feasible and abs(val - prev) <= rtol * abs(prev)
            break
        history.append(val)
        best_v = w
        done = prev is not None and abs(val - prev) <= rtol * max(abs(prev), 1e-300)
        stalled = np.max(np.abs(w - v)) <= 1e-12
        v = w
        feasible = True
        if done or stalled:
            g = grad_fn(v, delta)
            final = _lp_step(g, D, u)
            if final is not None:
                kkt = _kkt(g, v, u, D, final[1], final[2])
            converged = True
            break
    if best_v is None:
        return SolverReport(v, float("nan"), it, kkt, problem.violation(v), False,
                            objective_kind=kind)
    return SolverReport(best_v, history[-1], it, kkt, problem.violation(best_v), converged,
                        objective_init=history[0], objective_kind=kind, history=history)


def touch_point_start(problem: LogConcaveProblem, kind: str = "exact") -> np.ndarray:
    """Concave piecewise-linear minorant of ``u`` with kinks at touch points only.

    The best such minorant is found by dynamic programming; it is feasible and
    its value is a lower bound on the optimum.
    """
    t = np.ascontiguousarray(problem.points)
    u = np.ascontiguousarray(problem.u)
    _, touches = _kernels.concave_touch_dp(t, u, kind == "riemann")
    v = np.interp(t, t[touches], u[touches])
    i0, i1 = touches[0], touches[1]
    j0, j1 = touches[-2], touches[-1]
    left = t < t[i0]
    right = t > t[j1]
    v[left] = u[i0] + (t[left] - t[i0]) * (u[i1] - u[i0]) / (t[i1] - t[i0])
    v[right] = u[j1] + (t[right] - t[j1]) * (u[j1] - u[j0]) / (t[j1] - t[j0])
    return np.minimum(v, u)


def default_starts(problem: LogConcaveProblem, kind: str = "exact"):
    """Starting points in a fixed order: ``v_init``, one shifted and three truncated
    copies of ``u``, then the touch-point minorant."""
    u = problem.u
    starts = [problem.v_init, u - _START_SHIFT]
    w = np.exp(u - u.max())
    cdf = np.cumsum(w) / w.sum()
    for mass in _TRUNCATION_MASS:
        lo = int(np.searchsorted(cdf, 0.5 * (1.0 - mass)))
        hi = int(np.searchsorted(cdf, 0.5 * (1.0 + mass)))
        s = u - _TRUNCATION_DROP
        s[lo:hi + 1] = u[lo:hi + 1] - problem.d
        starts.append(s)
    starts.append(touch_point_start(problem, kind))
    return starts


def solve(problem: LogConcaveProblem, objective: str = "exact", tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, rtol: float = DEFAULT_RTOL,
          starts=None) -> SolverReport:
    """Maximize the chosen objective over concave ``v <= u``.

    Every start is run to convergence; the feasible result with the largest
    objective wins, ties going to the earlier start.

    Parameters
    ----------
    problem : LogConcaveProblem
    objective : {"exact", "riemann"}
    tol : float
        Feasibility tolerance on ``A v >= b``.
    max_iter : int
        Linear programs allowed per start.
    rtol : float
        Relative objective change that ends a run.
    starts : list of ndarray, optional
        Defaults to :func:`default_starts`.

    Returns
    -------
    SolverReport
    """
    _objective_pair(objective)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if starts is None:
        starts = default_starts(problem, objective)
    best = None
    total_iter = 0
    for idx, v0 in enumerate(starts):
        rep = _run(problem, v0, objective, tol, rtol, max_iter)
        rep.start = idx
        total_iter += rep.iterations
        if not np.isfinite(rep.objective):
            continue
        if best is None or (rep.converged, rep.objective) > (best.converged, best.objective):
            best = rep
    if best is None:
        v = np.asarray(starts[0], dtype=float)
        return SolverReport(v, float("nan"), total_iter, float("inf"),
                            problem.violation(v), False, objective_kind=objective)
    best.iterations = total_iter
    return best


# --------------------------------------------------------------------------
# Extraction
# --------------------------------------------------------------------------

def points_for_range(lo: float, hi: float, spacing: float = TARGET_SPACING,
                     max_points: int = MAX_VARIABLES) -> np.ndarray:
    """Odd number of equispaced points near ``spacing`` apart, at most ``max_points``."""
    m = int(math.ceil((hi - lo) / spacing)) + 1
    m = min(m, max_points)
    if m % 2 == 0:
        m -= 1 if m == max_points else -1
    return np.linspace(lo, hi, max(m, 3))


def solution_mass(v, delta: float, objective: str) -> float:
    return _objective_pair(objective)[0](v, delta)


def _solve_grid(f, d, objective, tol, max_iter, rtol):
    """Best solution over the positive runs of ``f``: ``(value, h0 values, report)``."""
    runs = positive_runs(f.values)
    if not runs:
        raise ValueError("density is zero on the whole grid")
    masses = []
    for a, b in runs:
        masses.append(float(trapezoid(f.values[a:b], f.points[a:b])))
    order = sorted(range(len(runs)), key=lambda i: (-masses[i], i))
    best = (0.0, np.zeros(len(f)), None)
    for i in order:
        a, b = runs[i]
        if b - a < 2 or (best[2] is not None and masses[i] <= best[0]):
            continue
        prob = build_problem(DensityGrid(f.points[a:b], f.values[a:b]), d)
        rep = solve(prob, objective, tol, max_iter, rtol)
        if not np.isfinite(rep.objective):
            if best[2] is None:
                best = (0.0, best[1], rep)
            continue
        if best[2] is None or rep.objective > best[0]:
            h = np.zeros(len(f))
            h[a:b] = np.minimum(np.exp(rep.v_star), f.values[a:b])
            rep.run = (a, b)
            rep.problem = prob
            best = (rep.objective, h, rep)
    return best


class SolverFailure(RuntimeError):
    """Raised when no feasible point was found."""


def extract_logconcave(f: DensityGrid, d: float = DEFAULT_D, objective: str = "exact",
                       tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                       k: int | None = None, rtol: float = DEFAULT_RTOL) -> BackgroundDecomposition:
    """Largest log-concave sub-density of ``f``.

    Grid points with ``f`` at or below :data:`POSITIVITY_FLOOR` are dropped. A
    log-concave background lives on an interval, so when the remaining points
    form several runs each run is solved (largest mass first) and the best
    result kept.

    Parameters
    ----------
    f : DensityGrid
    d : float
        Offset of the first start below ``log f``.
    objective : {"exact", "riemann"}
    tol, max_iter, rtol
        Passed to :func:`solve`.
    k : int, optional
        Resample ``f`` to ``2k + 1`` points over its span first.

    Returns
    -------
    BackgroundDecomposition
        ``pi0`` is the solved objective (capped at 1) and ``h0 = exp(v_star)``.
    """
    if k is not None and len(f) != 2 * k + 1:
        f = resample(f, 2 * k + 1)
    value, h, rep = _solve_grid(f, d, objective, tol, max_iter, rtol)
    if rep is None or not np.isfinite(rep.objective):
        raise SolverFailure("log-concave solver found no feasible point")
    if not rep.converged:
        raise SolverFailure(
            f"log-concave solver did not converge (violation {rep.feasibility_violation:.2e})")
    h0 = f.with_values(h)
    return normalized(value, h0, "logconcave", report=rep, mass=value)


def logconcave_interval(band: ConfidenceBand, **options):
    """``(pi_l, pi_u, h_l, h_u)`` from solving on the lower and upper band curves."""
    if np.all(band.lower.values <= POSITIVITY_FLOOR):
        lower_pi, h_l = 0.0, band.lower.with_values(np.zeros(len(band.lower)))
    else:
        low = extract_logconcave(band.lower, **options)
        lower_pi, h_l = low.pi0, low.h0
    up = extract_logconcave(band.upper, **options)
    return lower_pi, min(up.pi0, 1.0), h_l, up.h0


def dump_solution_csv(problem: LogConcaveProblem, report: SolverReport, path) -> None:
    """Write columns ``t, u, v_star`` for plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "v_star"])
        for row in zip(problem.points, problem.u, report.v_star):
            w.writerow([repr(float(x)) for x in row])


def matching_mass(grid: DensityGrid, report: SolverReport) -> float:
    """Integral of ``grid`` over the solved run, under the quadrature the solver
    maximized (exact for the log-linear interpolant, or the trapezoid sum).

    Zero-mass grids return 0. Trapezoid integration of an exact-objective
    solution differs from this by ``O(spacing**2)``.
    """
    a, b = report.run
    vals = np.asarray(grid.values[a:b])
    if not np.any(vals > 0):
        return 0.0
    v = np.log(np.maximum(vals, 1e-300))
    return solution_mass(v, grid.spacing, report.objective_kind)


def h0_mass_check(dec: BackgroundDecomposition) -> float:
    """Mass of ``h0`` under the quadrature matching the solved objective."""
    return matching_mass(dec.h0, dec.report)


__all__ = [
    "lambda_segment", "lambda_grad", "objective_exact", "gradient_exact", "objective_riemann",
    "gradient_riemann", "LogConcaveProblem", "build_problem", "SolverReport", "solve",
    "extract_logconcave", "logconcave_interval", "dump_solution_csv", "positive_runs",
    "points_for_range", "SolverFailure", "matching_mass", "h0_mass_check", "touch_point_start", "default_starts",
    "POSITIVITY_FLOOR",
]
