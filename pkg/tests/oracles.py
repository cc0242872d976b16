"""Independent reference values shared by the test modules."""
import cmath

import numpy as np


def single_qubit_c1(g, z, t):
    """Closed form of c'' + z c' + g^2 c = 0, c(0) = 1, c'(0) = 0."""
    d = cmath.sqrt(z * z - 4 * g * g)
    return np.exp(-z * t / 2) * (np.cosh(d * t / 2) + (z / d) * np.sinh(d * t / 2))


def brute_force_min_energy(rho, h, n_outer=4, n_polar=80, n_inner=80):
    """min over U = Rz(c) Ry(b) Rz(a) on a uniform grid of Tr[H U rho U^dag]."""
    a = np.linspace(0, 2 * np.pi, n_inner, endpoint=False)
    b = np.linspace(0, np.pi, n_polar)
    c = np.linspace(0, 2 * np.pi, n_outer, endpoint=False)
    A, B, C = np.meshgrid(a, b, c, indexing="ij")
    A, B, C = A.ravel(), B.ravel(), C.ravel()
    cb, sb = np.cos(B / 2), np.sin(B / 2)
    u = np.empty((A.size, 2, 2), dtype=complex)
    u[:, 0, 0] = np.exp(-0.5j * (A + C)) * cb
    u[:, 0, 1] = -np.exp(0.5j * (A - C)) * sb
    u[:, 1, 0] = np.exp(-0.5j * (A - C)) * sb
    u[:, 1, 1] = np.exp(0.5j * (A + C)) * cb
    rotated = u @ rho @ u.conj().transpose(0, 2, 1)
    energies = np.einsum("ij,nji->n", h, rotated).real
    return energies.min(), A.size


def random_qubit_state(rng):
    """Haar-random eigenbasis with uniformly drawn spectrum."""
    p = rng.uniform()
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q @ np.diag([p, 1 - p]) @ q.conj().T
