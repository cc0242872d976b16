"""Time-maximised metrics, detuning scans, onset detection and phase diagrams.

Grid evaluations are independent, so scans and diagrams can be spread over a
process pool (``workers``); results are always returned in grid order and do
not depend on the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SolverDivergence, solve
from .model import InitialState, ParameterError, SystemParams, TimeGrid
from .observables import metrics

DEFAULT_EPSILON = 1e-6
DEFAULT_GRID = TimeGrid(20.0, 8000)


@dataclass(frozen=True)
class SweepPoint:
    """Time maxima of one parameter point; ``status`` is ``'ok'`` or an error."""

    params: SystemParams
    deltaE_max: float
    W_max: float
    t_of_Wmax: float
    c2sq_at_Wmax: float
    rho22_at_Wmax: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def active(self, epsilon: float) -> bool:
        return self.ok and self.W_max > epsilon


@dataclass(frozen=True)
class CriticalPoint:
    """Smallest detuning where the maximal ergotropy leaves zero.

    ``bracket`` is (last inactive, first active); ``jump`` is W_max at the
    active end. ``at_lower_edge`` means the range starts inside the active
    phase; ``multiple_onsets`` means the coarse scan saw more than one
    inactive-to-active switch.
    """

    delta_c: float
    bracket: tuple
    jump: float
    at_lower_edge: bool = False
    multiple_onsets: bool = False
    n_onsets: int = 1


@dataclass
class PhaseDiagram:
    eta_axis: np.ndarray
    delta_axis: np.ndarray
    Wmax_grid: np.ndarray
    deltaE_grid: np.ndarray
    status: np.ndarray
    boundary: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    meta: dict = field(default_factory=dict)


def maximize_over_time(params: SystemParams, initial: InitialState = InitialState(),
                       grid: TimeGrid = DEFAULT_GRID, solver: str = "ode") -> SweepPoint:
    """Maxima of the stored energy and ergotropy over the time grid.

    The reported time and state snapshot are taken at the maximum of the
    ergotropy, or at the energy maximum when the ergotropy is zero throughout.
    """
    traj = solve(params, initial, grid, solver)
    m = metrics(traj)
    k_e = int(np.argmax(m.delta_e))
    k_w = int(np.argmax(m.ergotropy))
    k = k_w if m.ergotropy[k_w] > 0 else k_e
    return SweepPoint(
        params=params,
        deltaE_max=float(m.delta_e[k_e]),
        W_max=float(m.ergotropy[k_w]),
        t_of_Wmax=float(m.times[k]),
        c2sq_at_Wmax=float(m.c2sq[k]),
        rho22_at_Wmax=float(m.rho22[k]),
    )


def _failed(params, exc):
    nan = float("nan")
    return SweepPoint(params, nan, nan, nan, nan, nan, status=f"{type(exc).__name__}: {exc}")


def _evaluate_point(args):
    params, initial, grid, solver = args
    try:
        return maximize_over_time(params, initial, grid, solver)
    except (SolverDivergence, ParameterError, ValueError, np.linalg.LinAlgError) as exc:
        return _failed(params, exc)


def _resolve_workers(workers):
    if workers is None or workers == 1:
        return 1
    if workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def _map_points(param_list, initial, grid, solver, workers):
    jobs = [(p, initial, grid, solver) for p in param_list]
    n = _resolve_workers(workers)
    if n == 1 or len(jobs) < 2:
        return [_evaluate_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
        return list(pool.map(_evaluate_point, jobs, chunksize=max(1, len(jobs) // (4 * n))))


def _check_monotone(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr


def scan_delta(template: SystemParams, delta_grid, initial: InitialState = InitialState(),
               grid: TimeGrid = DEFAULT_GRID, solver: str = "ode",
               workers: int | None = 1) -> list[SweepPoint]:
    """One :class:`SweepPoint` per detuning; failing points are flagged, not raised."""
    deltas = _check_monotone(delta_grid, "delta_grid")
    return _map_points([template.replace(delta=float(d)) for d in deltas],
                       initial, grid, solver, workers)


def find_critical_detuning(template: SystemParams, delta_range=(0.0, 2.0),
                           epsilon: float = DEFAULT_EPSILON, resolution: float = 0.01,
                           initial: InitialState = InitialState(),
                           grid: TimeGrid = DEFAULT_GRID, solver: str = "ode",
                           coarse: list[SweepPoint] | None = None, n_coarse: int = 41,
                           workers: int | None = 1) -> CriticalPoint | None:
    """Locate the first detuning with ``W_max > epsilon``.

    A coarse scan brackets the onset, then bisection on the boolean activity
    indicator narrows the bracket to ``resolution``. ``coarse`` may supply an
    existing scan over the range to skip the coarse pass.
    """
    lo, hi = map(float, delta_range)
    if not lo < hi:
        raise ValueError("delta_range must satisfy min < max")
    if epsilon <= 0 or resolution <= 0:
        raise ValueError("epsilon and resolution must be positive")
    if coarse is None:
        coarse = scan_delta(template, np.linspace(lo, hi, n_coarse), initial, grid,
                            solver, workers)
    coarse = [pt for pt in coarse if pt.ok]
    if not coarse:
        return None
    flags = [pt.active(epsilon) for pt in coarse]
    onsets = [k for k in range(len(flags)) if flags[k] and (k == 0 or not flags[k - 1])]
    if not onsets:
        return None
    first = onsets[0]
    multiple = len(onsets) > 1
    if first == 0:
        pt = coarse[0]
        d0 = pt.params.delta
        return CriticalPoint(d0, (d0, d0), pt.W_max, at_lower_edge=True,
                             multiple_onsets=multiple, n_onsets=len(onsets))

    inactive = coarse[first - 1]
    active = coarse[first]
    a, b = inactive.params.delta, active.params.delta
    while b - a > resolution:
        mid = 0.5 * (a + b)
        pt = maximize_over_time(template.replace(delta=mid), initial, grid, solver)
        if pt.active(epsilon):
            b, active = mid, pt
        else:
            a = mid
    return CriticalPoint(0.5 * (a + b), (a, b), active.W_max,
                         multiple_onsets=multiple, n_onsets=len(onsets))


def derivative_Wmax(scan: list[SweepPoint]) -> np.ndarray:
    """dW_max/d(delta) by central differences, one-sided at the ends."""
    if len(scan) < 3:
        raise ValueError("derivative needs at least 3 scan points")
    d = np.array([pt.params.delta for pt in scan])
    w = np.array([pt.W_max for pt in scan])
    steps = np.diff(d)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValueError("derivative requires a uniform detuning grid")
    return np.gradient(w, steps[0], edge_order=1)


def onset_index(row_active: np.ndarray):
    """Index of the first active cell in a row, or None."""
    hits = np.flatnonzero(row_active)
    return int(hits[0]) if hits.size else None


def phase_diagram(eta_grid, delta_grid, template: SystemParams,
                  initial: InitialState = InitialState(), grid: TimeGrid = DEFAULT_GRID,
                  solver: str = "ode", epsilon: float = DEFAULT_EPSILON,
                  workers: int | None = 1) -> PhaseDiagram:
    """Evaluate W_max on the (eta, delta) grid and extract each row's onset.

    ``boundary[i]`` is the first detuning where row ``eta_grid[i]`` is active
    (NaN when the whole row is passive).
    """
    etas = _check_monotone(eta_grid, "eta_grid")
    deltas = _check_monotone(delta_grid, "delta_grid")
    cells = [template.replace(eta=float(e), delta=float(d)) for e in etas for d in deltas]
    pts = _map_points(cells, initial, grid, solver, workers)
    shape = (len(etas), len(deltas))
    wmax = np.array([pt.W_max for pt in pts]).reshape(shape)
    emax = np.array([pt.deltaE_max for pt in pts]).reshape(shape)
    status = np.array([pt.status for pt in pts], dtype=object).reshape(shape)
    boundary = np.full(len(etas), np.nan)
    for i in range(len(etas)):
        k = onset_index((status[i] == "ok") & (wmax[i] > epsilon))
        if k is not None:
            boundary[i] = deltas[k]
    return PhaseDiagram(etas, deltas, wmax, emax, status, boundary, epsilon)
