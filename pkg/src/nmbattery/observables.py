"""Reduced states and battery figures of merit: stored energy, power, ergotropy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .model import AmplitudePair, InitialState

STATE_TOL = 1e-9


@dataclass(frozen=True)
class TwoQubitState:
    """Two-qubit reduced state in the basis {|a1 a2>, |a1 b2>, |b1 a2>, |b1 b2>}.

    Only the single-excitation block and the ground population are non-zero;
    the doubly excited population vanishes identically.
    """

    rho22: float
    rho33: float
    rho44: float
    rho23: complex

    @classmethod
    def from_pair(cls, pair: AmplitudePair, tol: float = STATE_TOL) -> "TwoQubitState":
        pair.check(tol)
        r22 = abs(pair.c1) ** 2
        r33 = abs(pair.c2) ** 2
        return cls(r22, r33, 1.0 - r22 - r33, pair.c1 * np.conj(pair.c2))

    @property
    def trace(self) -> float:
        return self.rho22 + self.rho33 + self.rho44

    def matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1] = self.rho22
        rho[2, 2] = self.rho33
        rho[3, 3] = self.rho44
        rho[1, 2] = self.rho23
        rho[2, 1] = np.conj(self.rho23)
        return rho

    def eigenvalues(self) -> np.ndarray:
        """Closed-form spectrum ``(0, lambda_+, lambda_-, rho44)``."""
        s = self.rho22 + self.rho33
        root = np.sqrt((self.rho22 - self.rho33) ** 2 + 4 * abs(self.rho23) ** 2)
        return np.array([0.0, 0.5 * (s + root), 0.5 * (s - root), self.rho44])

    def battery(self) -> "QubitState":
        return QubitState(self.rho33)

    def charger(self) -> "QubitState":
        return QubitState(self.rho22)


@dataclass(frozen=True)
class QubitState:
    """Diagonal single-qubit state with excited population ``p_excited``."""

    p_excited: float

    def matrix(self) -> np.ndarray:
        # excited level first, matching battery_hamiltonian
        return np.diag([self.p_excited, 1.0 - self.p_excited]).astype(complex)


def two_qubit_state(pair: AmplitudePair) -> TwoQubitState:
    return TwoQubitState.from_pair(pair)


def battery_state(pair: AmplitudePair) -> QubitState:
    """Partial trace over the charger: the battery is diagonal with weight |c2|^2."""
    return QubitState(abs(pair.c2) ** 2)


def battery_hamiltonian(omega0: float = 1.0) -> np.ndarray:
    """``(omega0/2) sigma_z`` with the excited level |a> first."""
    return 0.5 * omega0 * np.diag([1.0, -1.0]).astype(complex)


def energy_variation(pair: AmplitudePair, initial: InitialState = InitialState(),
                     w0: float = 1.0) -> float:
    return w0 * (abs(pair.c2) ** 2 - abs(initial.c2) ** 2)


def average_power(delta_e, t):
    """Stored energy per elapsed time, with the removable point ``P(0) = 0``.

    Works elementwise on arrays.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be non-negative")
    de = np.asarray(delta_e, dtype=float)
    safe = np.where(t_arr > 0, t_arr, 1.0)
    out = np.where(t_arr > 0, de / safe, 0.0)
    return float(out) if out.ndim == 0 else out


def ergotropy_from_population(c2sq, w0: float = 1.0):
    """Ergotropy of a diagonal qubit with excited population ``c2sq``.

    Zero at or below half inversion, ``w0*(2p - 1)`` above.
    """
    p = np.asarray(c2sq, dtype=float)
    # Heaviside with theta(0) = 1; both branches vanish at p = 1/2 anyway
    out = np.where(p >= 0.5, w0 * (2 * p - 1), 0.0)
    return float(out) if out.ndim == 0 else out


def ergotropy_two_level(pair: AmplitudePair, w0: float = 1.0) -> float:
    return ergotropy_from_population(abs(pair.c2) ** 2, w0)


def _check_hermitian(m, name, tol):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise ValueError(f"{name} is not Hermitian")
    return m


def passive_state(state, hamiltonian, tol: float = STATE_TOL) -> np.ndarray:
    """Passive counterpart of ``state``: its populations sorted in decreasing
    order and placed on the energy eigenbasis sorted in increasing order."""
    rho = _check_hermitian(state, "state", tol)
    h = _check_hermitian(hamiltonian, "hamiltonian", tol)
    if rho.shape != h.shape:
        raise ValueError("state and hamiltonian shapes differ")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"state trace {np.trace(rho).real!r} is not 1")
    r = np.linalg.eigvalsh(rho)
    if r[0] < -tol:
        raise ValueError("state is not positive semidefinite")
    eps, vecs = np.linalg.eigh(h)
    order_e = np.argsort(eps, kind="stable")
    r_desc = np.sort(r, kind="stable")[::-1]
    v = vecs[:, order_e]
    return (v * r_desc) @ v.conj().T


def ergotropy_general(state, hamiltonian, tol: float = STATE_TOL) -> float:
    """Ergotropy ``Tr[H rho] - Tr[H sigma]`` with ``sigma`` the passive state."""
    rho = np.asarray(state, dtype=complex)
    h = np.asarray(hamiltonian, dtype=complex)
    sigma = passive_state(rho, h, tol)
    w = np.trace(h @ rho).real - np.trace(h @ sigma).real
    # rounding can leave a tiny negative value for passive inputs
    return max(w, 0.0)


@dataclass(frozen=True)
class MetricsSeries:
    """Per-time-point battery metrics (energies in W0, power in W0*gamma)."""

    times: np.ndarray
    delta_e: np.ndarray
    power: np.ndarray
    ergotropy: np.ndarray
    c2sq: np.ndarray
    rho22: np.ndarray

    def __len__(self):
        return len(self.times)


def metrics(traj: Trajectory, w0: float | None = None) -> MetricsSeries:
    """Energy variation, average power and ergotropy along a trajectory.

    ``w0`` defaults to ``traj.params.omega0``.
    """
    if w0 is None:
        w0 = traj.params.w0
    c2sq = traj.c2sq
    de = w0 * (c2sq - abs(traj.initial.c2) ** 2)
    return MetricsSeries(
        times=traj.times,
        delta_e=de,
        power=average_power(de, traj.times),
        ergotropy=ergotropy_from_population(c2sq, w0),
        c2sq=c2sq,
        rho22=traj.c1sq,
    )
