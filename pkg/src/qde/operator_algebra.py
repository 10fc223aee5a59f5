"""Dense operator backbone for 2 to 32 dimensional spaces.

Thin, checked wrappers over numpy/scipy: Kronecker products, Hermitian
eigendecomposition, unitary propagators and subsystem embedding.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimMismatch, NotHermitian

HERMITIAN_RTOL = 1e-12
RECONSTRUCT_RTOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# basis order is (|1>, |0>), so the raising operator maps index 1 -> 0
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = SP.T.copy()

PAULI = {"i": I2, "x": SX, "y": SY, "z": SZ}


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def __len__(self):
        return len(self.eigenvalues)


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimMismatch(f"expected a 2D matrix, got shape {m.shape}")
    return m


def hermiticity_error(a):
    """max|A - A^dagger| relative to max|A| (0 for the zero matrix)."""
    a = as_matrix(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and hermiticity_error(a) < rtol


def check_hermitian(a, rtol=HERMITIAN_RTOL):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimMismatch(f"matrix is not square: {a.shape}")
    err = hermiticity_error(a)
    if err >= rtol:
        raise NotHermitian(f"relative anti-Hermitian part {err:.3e} exceeds {rtol:.1e}")
    return a


def kron(*ops):
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise DimMismatch("kron needs at least one operand")
    return reduce(np.kron, (as_matrix(o) for o in ops))


def hermitian_eig(h):
    h = check_hermitian(h)
    # symmetrize so eigh sees exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return Spectrum(w, v)


def propagator(h, t):
    """exp(-i h t) by eigendecomposition."""
    spec = hermitian_eig(h)
    v = spec.eigenvectors
    return (v * np.exp(-1j * spec.eigenvalues * t)) @ v.conj().T


def unitary_from_generator(g, angle=1.0):
    """exp(-i angle g) for a Hermitian generator g."""
    return propagator(g, angle)


def embed(op, slot, dims):
    """Place ``op`` on subsystem ``slot`` of a tensor product with ``dims``."""
    op = as_matrix(op)
    dims = [int(d) for d in dims]
    if not 0 <= slot < len(dims):
        raise DimMismatch(f"slot {slot} outside {len(dims)} subsystems")
    if op.shape != (dims[slot], dims[slot]):
        raise DimMismatch(f"operator shape {op.shape} does not match dims[{slot}] = {dims[slot]}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op
    return kron(*factors)


def commutator(a, b):
    return a @ b - b @ a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def unitarity_error(u):
    u = as_matrix(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def phase_distance(u, v):
    """min over phi of the Frobenius norm of u - exp(i phi) v."""
    u, v = as_matrix(u), as_matrix(v)
    if u.shape != v.shape:
        raise DimMismatch(f"{u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if overlap != 0 else 1.0
    # direct difference; the expanded form cancels catastrophically near 0
    return float(np.linalg.norm(u - phase * v))


def partial_trace(rho, dims, keep):
    """Trace out every subsystem not listed in ``keep``."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    r = np.asarray(rho).reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, r)
    d = int(np.prod([dims[k] for k in keep]))
    return res.reshape(d, d)
