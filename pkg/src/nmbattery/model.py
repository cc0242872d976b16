"""Physical parameters, initial state, bath kernel and parameter validation.

All rates are given in the same units as ``gamma``.  The solvers rescale them
by ``gamma`` so that time is always measured as the dimensionless ``gamma*t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np


class CrossSign(str, enum.Enum):
    """Sign convention of the bath-mediated charger/battery cross term.

    ``COMMON`` is the standard common-reservoir form in which both qubits feed
    the same bath amplitude, i.e. dC1/dt contains ``-g1*g2*B2``.
    ``BRACKET`` flips that term to ``+g1*g2*B2``.
    """

    COMMON = "common"
    BRACKET = "bracket"

    @property
    def factor(self) -> float:
        """Coefficient multiplying ``g1*g2`` in the coupling matrix."""
        return 1.0 if self is CrossSign.COMMON else -1.0


class ParameterError(ValueError):
    """Raised when a parameter set fails validation."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class Issue:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


@dataclass(frozen=True)
class SystemParams:
    """Rates and frequencies of the charger/battery/reservoir model.

    Parameters
    ----------
    eta : float
        Coherent charger-battery coupling.
    g1, g2 : float
        Charger-bath and battery-bath coupling strengths.
    gamma : float
        Width of the Lorentzian spectral density (reference rate).
    delta : float
        Detuning between the bath peak and the qubit transition.
    omega0 : float
        Qubit transition frequency; the energy quantum is ``W0 = omega0``.
    cross_sign : CrossSign
        Sign convention of the g1*g2 cross term.
    """

    eta: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    gamma: float = 1.0
    delta: float = 0.0
    omega0: float = 1.0
    cross_sign: CrossSign = CrossSign.COMMON

    def __post_init__(self):
        object.__setattr__(self, "cross_sign", CrossSign(self.cross_sign))

    @property
    def w0(self) -> float:
        return self.omega0

    @property
    def z(self) -> complex:
        """Complex decay rate of the memory kernel, ``gamma/2 + i*delta``."""
        return 0.5 * self.gamma + 1j * self.delta

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def scaled(self) -> "SystemParams":
        """Copy with every rate expressed in units of ``gamma`` (so gamma == 1)."""
        gm = self.gamma
        return replace(self, eta=self.eta / gm, g1=self.g1 / gm, g2=self.g2 / gm,
                       delta=self.delta / gm, gamma=1.0)

    def coherent_matrix(self) -> np.ndarray:
        """Generator of the closed two-qubit dynamics, ``-i*(eta/2)*sigma_x``."""
        return -0.5j * self.eta * np.array([[0.0, 1.0], [1.0, 0.0]])

    def coupling_matrix(self) -> np.ndarray:
        """Matrix G such that the memory term reads ``-G @ B``."""
        cross = self.cross_sign.factor * self.g1 * self.g2
        return np.array([[self.g1 ** 2, cross], [cross, self.g2 ** 2]], dtype=float)


@dataclass(frozen=True)
class InitialState:
    """Initial superposition ``cos(theta/2)|a1 b2> + sin(theta/2) e^{i phi}|b1 a2>``.

    The default (theta = 0) is a fully charged charger and an empty battery.
    """

    theta: float = 0.0
    phi: float = 0.0

    @property
    def c1(self) -> complex:
        return complex(math.cos(self.theta / 2))

    @property
    def c2(self) -> complex:
        return math.sin(self.theta / 2) * complex(math.cos(self.phi), math.sin(self.phi))

    def amplitudes(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)


@dataclass(frozen=True)
class AmplitudePair:
    """Rotating-frame excitation amplitudes of charger and battery at one time."""

    c1: complex
    c2: complex

    @property
    def norm(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2

    def check(self, tol: float = 1e-9) -> None:
        n = self.norm
        if n > 1 + tol or n < -tol:
            raise ValueError(f"amplitude norm {n!r} outside [0, 1] (tol {tol:g})")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, t_end]`` with ``n_steps`` intervals, in units of 1/gamma."""

    t_end: float = 20.0
    n_steps: int = 8000
    times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        t = np.linspace(0.0, self.t_end, self.n_steps + 1)
        t.flags.writeable = False
        object.__setattr__(self, "times", t)

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end, self.n_steps * factor)


def kernel(params: SystemParams, tau):
    """Bath correlation function ``exp(-(gamma/2 + i*delta) * tau)``.

    Accepts a scalar or an array of non-negative lags.
    """
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0) or np.any(np.isnan(tau_arr)):
        raise ValueError("kernel lag must be non-negative")
    out = np.exp(-params.z * tau_arr)
    return complex(out) if out.ndim == 0 else out


def spectral_density(params: SystemParams, omega, omega_c: float | None = None):
    """Unit-normalised Lorentzian of full width ``gamma`` centred on ``omega_c``.

    ``omega_c`` defaults to ``omega0 + delta``.
    """
    if omega_c is None:
        omega_c = params.omega0 + params.delta
    half = 0.5 * params.gamma
    return (half / np.pi) / ((np.asarray(omega, dtype=float) - omega_c) ** 2 + half ** 2)


def validate(params: SystemParams) -> list[Issue]:
    """Return every invariant violation of ``params``; empty means valid."""
    issues = []
    finite = set()
    for name in ("eta", "g1", "g2", "gamma", "delta", "omega0"):
        value = getattr(params, name)
        if isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value):
            finite.add(name)
        else:
            issues.append(Issue(name, "must be a finite real number"))
    if "gamma" in finite and params.gamma <= 0:
        issues.append(Issue("gamma", "gamma must be positive"))
    if "omega0" in finite and params.omega0 <= 0:
        issues.append(Issue("omega0", "omega0 must be positive"))
    for name in ("g1", "g2"):
        if name in finite and getattr(params, name) < 0:
            issues.append(Issue(name, "couplings must be non-negative"))
    return issues


def check_params(params: SystemParams) -> SystemParams:
    issues = validate(params)
    if issues:
        raise ParameterError(issues)
    return params
