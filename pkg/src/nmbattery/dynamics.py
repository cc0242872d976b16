"""Amplitude dynamics of the charger/battery pair in a Lorentzian reservoir.

Three independent routes solve the same integro-differential system

    dC/dt = A C - G * int_0^t f(t - s) C(s) ds,    f(tau) = exp(-z tau),

with ``A = -i (eta/2) sigma_x``, ``G`` the bath coupling matrix and
``z = gamma/2 + i delta``:

* :func:`solve_quadrature` integrates the Volterra form directly, O(n^2).
* :func:`solve_ode_aux` embeds the convolution as auxiliary ODEs
  ``dB/dt = C - z B`` and uses fixed-step RK4, O(n).
* :func:`solve_laplace` inverts the Laplace-domain linear system by
  partial fractions over the roots of a quartic.

Times are always in units of ``1/gamma``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .model import (AmplitudePair, InitialState, SystemParams, TimeGrid,
                    check_params)

__all__ = [
    "SolverDivergence", "Trajectory", "LaplaceSolution", "CrossValidationReport",
    "rk4_step", "integrate_rk4", "solve_quadrature", "solve_ode_aux",
    "solve_laplace", "evaluate", "solve", "cross_validate", "SOLVERS",
]

DEFAULT_NORM_TOL = 1e-6
DEGENERACY_TOL = 1e-8
RESIDUE_LIMIT = 1e4
MOMENT_TOL = 1e-9


class SolverDivergence(RuntimeError):
    """Raised when a solver leaves the physical region |C1|^2 + |C2|^2 <= 1."""

    def __init__(self, solver, step, norm):
        self.solver = solver
        self.step = step
        self.norm = norm
        super().__init__(f"{solver}: norm {norm:.12g} exceeds bound at step {step}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled amplitudes ``c1[k], c2[k]`` at ``grid.times[k]`` (units of 1/gamma)."""

    grid: TimeGrid
    c1: np.ndarray
    c2: np.ndarray
    params: SystemParams
    initial: InitialState
    solver: str = "ode"
    notes: tuple = ()

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def amplitudes(self) -> list[AmplitudePair]:
        return [AmplitudePair(complex(a), complex(b)) for a, b in zip(self.c1, self.c2)]

    @property
    def c2sq(self) -> np.ndarray:
        return np.abs(self.c2) ** 2

    @property
    def c1sq(self) -> np.ndarray:
        return np.abs(self.c1) ** 2

    @property
    def norm(self) -> np.ndarray:
        return self.c1sq + self.c2sq

    def __len__(self):
        return len(self.c1)

    def __getitem__(self, k) -> AmplitudePair:
        return AmplitudePair(complex(self.c1[k]), complex(self.c2[k]))


@dataclass(frozen=True)
class LaplaceSolution:
    """Partial-fraction form ``C_i(t) = sum_k residues[i, k] * exp(poles[k] * t)``.

    When the poles are too close for reliable residues, ``degenerate`` is set
    and :func:`evaluate` integrates the auxiliary ODE system instead.
    """

    poles: np.ndarray
    residues: np.ndarray
    params: SystemParams
    initial: InitialState
    degenerate: bool = False
    min_separation: float = np.inf


@dataclass
class CrossValidationReport:
    tol: float
    deviations: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        if not self.deviations:
            return np.inf
        return max(max(d.values()) for d in self.deviations.values())

    @property
    def passed(self) -> bool:
        return not self.errors and self.max_deviation < self.tol

    def summary(self) -> str:
        lines = []
        for pair, dev in self.deviations.items():
            parts = ", ".join(f"{k}={v:.3e}" for k, v in dev.items())
            lines.append(f"{pair[0]} vs {pair[1]}: {parts}")
        for name, err in self.errors.items():
            lines.append(f"{name}: FAILED ({err})")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: max deviation {self.max_deviation:.3e} (tol {self.tol:.1e})")
        return "\n".join(lines)


def _check_norm(name, c1, c2, tol):
    norm = np.abs(c1) ** 2 + np.abs(c2) ** 2
    bad = np.flatnonzero((norm > 1 + 10 * tol) | ~np.isfinite(norm))
    if bad.size:
        raise SolverDivergence(name, int(bad[0]), float(norm[bad[0]]))


def rk4_step(fun, t, y, h):
    """One classical fourth-order Runge-Kutta step for ``dy/dt = fun(t, y)``."""
    k1 = fun(t, y)
    k2 = fun(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = fun(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = fun(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_rk4(fun, y0, times):
    """Fixed-step RK4 over the given time points; returns an array (len(times), len(y0))."""
    y = np.asarray(y0, dtype=complex)
    out = np.empty((len(times), y.size), dtype=complex)
    out[0] = y
    for k in range(len(times) - 1):
        y = rk4_step(fun, times[k], y, times[k + 1] - times[k])
        out[k + 1] = y
    return out


def _aux_generator(p: SystemParams) -> np.ndarray:
    """4x4 generator of the embedded system for the state (C1, C2, B1, B2)."""
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = p.coherent_matrix()
    m[:2, 2:] = -p.coupling_matrix()
    m[2:, :2] = np.eye(2)
    m[2:, 2:] = -p.z * np.eye(2)
    return m


def solve_ode_aux(params: SystemParams, initial: InitialState = InitialState(),
                  grid: TimeGrid = TimeGrid(), norm_tol: float = DEFAULT_NORM_TOL) -> Trajectory:
    """Solve via the exact local embedding of the exponential memory.

    With ``B_i(t) = int_0^t f(t - s) C_i(s) ds`` the system closes as

        dC/dt = A C - G B,    dB/dt = C - z B,    B(0) = 0,

    which is linear with constant coefficients. The RK4 update of such a
    system is the fixed matrix ``sum_{j<=4} (hM)^j / j!``; it is built once
    and applied at every step.
    """
    check_params(params)
    p = params.scaled()
    m = _aux_generator(p)
    h = grid.dt
    hm = h * m
    step = np.eye(4, dtype=complex)
    term = np.eye(4, dtype=complex)
    for j in range(1, 5):
        term = term @ hm / j
        step = step + term
    y = np.zeros((grid.n_steps + 1, 4), dtype=complex)
    y[0, :2] = initial.amplitudes()
    cur = y[0]
    for k in range(grid.n_steps):
        cur = step @ cur
        y[k + 1] = cur
    _check_norm("ode", y[:, 0], y[:, 1], norm_tol)
    return Trajectory(grid, y[:, 0].copy(), y[:, 1].copy(), params, initial, "ode")


def _quadrature_pass(p: SystemParams, c0: np.ndarray, grid: TimeGrid) -> np.ndarray:
    n = grid.n_steps
    h = grid.dt
    a = p.coherent_matrix()
    g = p.coupling_matrix()
    f = np.exp(-p.z * h * np.arange(n + 1))
    y = np.zeros((n + 1, 2), dtype=complex)
    y[0] = c0
    # implicit part of the trapezoidal corrector: y_{k+1} appears in both the
    # local term and the newest node of the memory integral (weight h/2, f(0)=1)
    lhs = np.linalg.inv(np.eye(2) - 0.5 * h * a + 0.25 * h * h * g)
    rate = a @ c0
    for k in range(n):
        # history part of int_0^{t_{k+1}} f(t_{k+1}-s) y(s) ds, all known nodes
        hist = 0.5 * f[k + 1] * y[0]
        if k:
            hist = hist + f[k:0:-1] @ y[1:k + 1]
        hist = h * hist
        # trapezoidal corrector; the system is linear so it is solved exactly
        # instead of iterating from an explicit predictor
        rhs = y[k] + 0.5 * h * rate - 0.5 * h * (g @ hist)
        y[k + 1] = lhs @ rhs
        memory = hist + 0.5 * h * y[k + 1]
        rate = a @ y[k + 1] - g @ memory
    return y


def solve_quadrature(params: SystemParams, initial: InitialState = InitialState(),
                     grid: TimeGrid = TimeGrid(), extrapolate: bool = True,
                     norm_tol: float = DEFAULT_NORM_TOL) -> Trajectory:
    """Integrate the Volterra form directly, trapezoid in time and in memory.

    The memory integral is re-evaluated over the full history at each step
    with trapezoidal weights, so the cost is O(n^2). The scheme is second
    order with an even error expansion; ``extrapolate`` combines the grid
    with its 2x refinement (Richardson) to reach fourth order.
    """
    check_params(params)
    p = params.scaled()
    c0 = initial.amplitudes()
    y = _quadrature_pass(p, c0, grid)
    if extrapolate:
        fine = _quadrature_pass(p, c0, grid.refined(2))[::2]
        y = (4.0 * fine - y) / 3.0
    _check_norm("quadrature", y[:, 0], y[:, 1], norm_tol)
    return Trajectory(grid, y[:, 0].copy(), y[:, 1].copy(), params, initial, "quadrature")


def _char_polys(p: SystemParams):
    """Polynomial matrix N(s) with N(s) F(s) = (s + z) C(0) when the bath couples.

    Returns (n11, n12, n22, numerator_factor) as numpy.polynomial objects.
    """
    P = np.polynomial.Polynomial
    half_eta = 0.5j * p.eta
    if p.g1 == 0 and p.g2 == 0:
        # no bath: Lambda(s) never appears, do not clear its denominator
        return P([0, 1]), P([half_eta]), P([0, 1]), P([1])
    cross = p.cross_sign.factor * p.g1 * p.g2
    spz = P([p.z, 1])
    n11 = P([0, 1]) * spz + p.g1 ** 2
    n22 = P([0, 1]) * spz + p.g2 ** 2
    n12 = half_eta * spz + cross
    return n11, n12, n22, spz


def solve_laplace(params: SystemParams, initial: InitialState = InitialState()) -> LaplaceSolution:
    """Invert the Laplace-domain system by partial fractions.

    Clearing ``Lambda(s) = 1/(s + z)`` turns the 2x2 system into
    ``N(s) F(s) = (s + z) C(0)`` with ``det N`` a quartic. Its roots are the
    companion-matrix eigenvalues (``numpy.roots``), polished by Newton steps;
    residues follow from ``adj N(s_k) (s_k + z) C(0) / det'(s_k)``.
    """
    check_params(params)
    p = params.scaled()
    n11, n12, n22, factor = _char_polys(p)
    det = n11 * n22 - n12 * n12
    coeffs = det.coef
    poles = np.roots(coeffs[::-1])
    ddet = det.deriv()
    for _ in range(2):
        d = ddet(poles)
        ok = np.abs(d) > 0
        poles[ok] = poles[ok] - det(poles[ok]) / d[ok]

    sep = min((abs(a - b) for a, b in itertools.combinations(poles, 2)), default=np.inf)
    c0 = initial.amplitudes()
    if sep < DEGENERACY_TOL:
        return LaplaceSolution(poles, np.zeros((2, len(poles)), dtype=complex), params,
                               initial, degenerate=True, min_separation=sep)
    num1 = (n22 * c0[0] - n12 * c0[1]) * factor
    num2 = (n11 * c0[1] - n12 * c0[0]) * factor
    d = ddet(poles)
    residues = np.vstack([num1(poles) / d, num2(poles) / d])
    # near-double roots are only resolved to ~sqrt(machine eps), so also reject
    # residues that blow up or miss the exact values C(0) and C'(0) = A C(0)
    c0_rate = p.coherent_matrix() @ c0
    bad = (np.max(np.abs(residues)) > RESIDUE_LIMIT
           or np.max(np.abs(residues.sum(axis=1) - c0)) > MOMENT_TOL
           or np.max(np.abs(residues @ poles - c0_rate)) > MOMENT_TOL)
    return LaplaceSolution(poles, residues, params, initial, degenerate=bool(bad),
                           min_separation=sep)


def evaluate(solution: LaplaceSolution, grid: TimeGrid = TimeGrid()) -> Trajectory:
    """Sample a Laplace solution on ``grid``."""
    if solution.degenerate:
        traj = solve_ode_aux(solution.params, solution.initial, grid)
        return Trajectory(grid, traj.c1, traj.c2, solution.params, solution.initial,
                          "laplace", notes=("degenerate poles: evaluated with ode solver",))
    if not np.any(solution.residues):
        raise ValueError("all residues vanish; initial state is not normalised")
    if not (np.all(np.isfinite(solution.poles)) and np.all(np.isfinite(solution.residues))):
        raise ValueError("non-finite poles or residues")
    t = grid.times
    modes = np.exp(np.outer(t, solution.poles))
    c = modes @ solution.residues.T
    # exact value at t = 0 rather than the rounded residue sum
    c[0] = solution.initial.amplitudes()
    return Trajectory(grid, c[:, 0].copy(), c[:, 1].copy(), solution.params,
                      solution.initial, "laplace")


def _solve_laplace_grid(params, initial=InitialState(), grid=TimeGrid()):
    return evaluate(solve_laplace(params, initial), grid)


SOLVERS = {
    "ode": solve_ode_aux,
    "laplace": _solve_laplace_grid,
    "quadrature": solve_quadrature,
}


def solve(params: SystemParams, initial: InitialState = InitialState(),
          grid: TimeGrid = TimeGrid(), solver: str = "ode") -> Trajectory:
    """Dispatch to one of ``'ode'`` (default), ``'laplace'`` or ``'quadrature'``."""
    try:
        fn = SOLVERS[solver]
    except KeyError:
        raise ValueError(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}") from None
    return fn(params, initial, grid)


def cross_validate(params: SystemParams, initial: InitialState = InitialState(),
                   grid: TimeGrid = TimeGrid(), tol: float = 1e-4) -> CrossValidationReport:
    """Run all three solvers and compare populations and the coherence C1 C2*."""
    report = CrossValidationReport(tol=tol)
    trajs = {}
    for name in ("ode", "laplace", "quadrature"):
        try:
            trajs[name] = solve(params, initial, grid, name)
        except SolverDivergence as exc:
            report.errors[name] = str(exc)
        report.notes.extend(trajs[name].notes if name in trajs else ())
    for a, b in itertools.combinations(trajs, 2):
        ta, tb = trajs[a], trajs[b]
        report.deviations[(a, b)] = {
            "c1sq": float(np.max(np.abs(ta.c1sq - tb.c1sq))),
            "c2sq": float(np.max(np.abs(ta.c2sq - tb.c2sq))),
            "coherence": float(np.max(np.abs(ta.c1 * ta.c2.conj() - tb.c1 * tb.c2.conj()))),
        }
    return report
