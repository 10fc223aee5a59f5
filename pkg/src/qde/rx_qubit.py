"""Three-electron triple-dot (resonant exchange) qubit.

The m_s = -1/2, S = 1/2 sector is represented in the fixed basis
``(e0, g0, s1, s3)``: the two (1,1,1) states followed by the two polarized
(2,0,1) and (1,0,2) singlet-like states.  At the symmetric point the
Hamiltonian splits into two 2x2 blocks and is solved in closed form.

Eigenbasis order ("eigen4") is ``(-e, +e, -g, +g)`` and the logical states
are ``|1> = |-e>`` and ``|0> = |-g>``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonSymmetricPoint
from .operator_algebra import I2, SX, SZ

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)

BASES = ("original", "symmetrized", "eigen4", "qubit2")
EIGEN4_LABELS = ("-e", "+e", "-g", "+g")
# positions of |1> and |0> inside eigen4
LOGICAL_INDICES = (0, 2)


@dataclass(frozen=True)
class RxParams:
    """Hubbard parameters of one qubit, all in rad/ns.

    ``t_l`` and ``t_r`` default to ``t_c``; ``epsilon`` is the outer-dot
    detuning and is zero at the symmetric operating point.
    """

    delta: float
    t_c: float
    epsilon: float = 0.0
    t_l: float = None
    t_r: float = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.t_c < 0:
            raise ValueError(f"t_c must be non-negative, got {self.t_c}")
        if self.t_l is None:
            object.__setattr__(self, "t_l", self.t_c)
        if self.t_r is None:
            object.__setattr__(self, "t_r", self.t_c)

    @property
    def is_symmetric(self):
        return self.epsilon == 0.0 and self.t_l == self.t_r

    @classmethod
    def from_hubbard(cls, U, V, eps1, eps2, eps3, t_l, t_r):
        """Build from raw on-site/nearest-neighbour energies.

        Uses delta = U - 2V - V_m with V_m = -eps2 + (eps1 + eps3)/2 and
        epsilon = -(eps1 - eps3)/2.  The sign of epsilon follows the
        plunger-voltage convention and is never exercised away from 0 here.
        """
        v_m = -eps2 + 0.5 * (eps1 + eps3)
        delta = U - 2.0 * V - v_m
        eps = -0.5 * (eps1 - eps3)
        t_c = 0.5 * (t_l + t_r)
        return cls(delta=delta, t_c=t_c, epsilon=eps, t_l=t_l, t_r=t_r)


@dataclass(frozen=True)
class RxEigenmodel:
    """Exact symmetric-point eigenstructure of one qubit."""

    delta: float
    t_c: float
    theta_e: float
    theta_g: float
    Omega_e: float
    Omega_g: float
    omega: float
    q0: float
    qz: float
    qx: float
    # columns are |-e>, |+e>, |-g>, |+g> in the (e0, g0, s1, s3) basis
    eigenvectors: np.ndarray = field(repr=False)
    # matching energies, including the uniform delta/2 shift
    energies: np.ndarray = field(repr=False)


def build_hubbard(p):
    """4x4 Hamiltonian in the (e0, g0, s1, s3) basis."""
    tl, tr = p.t_l, p.t_r
    h = np.array(
        [
            [0.0, 0.0, -tl / 2, -tr / 2],
            [0.0, 0.0, -SQRT3 * tl / 2, SQRT3 * tr / 2],
            [-tl / 2, -SQRT3 * tl / 2, p.delta + p.epsilon, 0.0],
            [-tr / 2, SQRT3 * tr / 2, 0.0, p.delta - p.epsilon],
        ]
    )
    return h.astype(complex)


def symmetrizer():
    """Columns e0, s+, g0, s- expressed in the original basis."""
    s = np.zeros((4, 4))
    s[0, 0] = 1.0
    s[2, 1] = s[3, 1] = 1 / SQRT2
    s[1, 2] = 1.0
    s[2, 3], s[3, 3] = 1 / SQRT2, -1 / SQRT2
    return s.astype(complex)


def build_symmetric(p):
    """Block-diagonal form in the (e0, s+, g0, s-) basis."""
    if p.epsilon != 0.0 or p.t_l != p.t_r:
        raise NonSymmetricPoint("symmetrized form needs epsilon = 0 and t_l = t_r")
    tc = p.t_c
    h = np.zeros((4, 4))
    h[0, 1] = h[1, 0] = -tc / SQRT2
    h[1, 1] = p.delta
    h[2, 3] = h[3, 2] = -np.sqrt(1.5) * tc
    h[3, 3] = p.delta
    return h.astype(complex)


def charge_coefficients_from_angles(theta_e, theta_g):
    ce, cg = np.cos(theta_e), np.cos(theta_g)
    q0 = 1.25 - (ce + cg) / 8.0
    qz = (ce - cg) / 8.0
    qx = 0.5 * np.sin(theta_e / 2) * np.sin(theta_g / 2)
    return float(q0), float(qz), float(qx)


def solve_symmetric(p):
    if p.epsilon != 0.0:
        raise NonSymmetricPoint(f"epsilon must be exactly 0, got {p.epsilon}")
    if p.t_l != p.t_r:
        raise NonSymmetricPoint("symmetric solution requires t_l = t_r")
    d, tc = p.delta, p.t_c
    Om_e = np.hypot(d, SQRT2 * tc)
    Om_g = np.hypot(d, np.sqrt(6.0) * tc)
    th_e = np.arctan2(SQRT2 * tc, d)
    th_g = np.arctan2(np.sqrt(6.0) * tc, d)
    ce, se = np.cos(th_e / 2), np.sin(th_e / 2)
    cg, sg = np.cos(th_g / 2), np.sin(th_g / 2)
    e0, g0 = np.eye(4)[0], np.eye(4)[1]
    s_plus = np.array([0, 0, 1, 1]) / SQRT2
    s_minus = np.array([0, 0, 1, -1]) / SQRT2
    vecs = np.column_stack(
        [ce * e0 + se * s_plus, -se * e0 + ce * s_plus, cg * g0 + sg * s_minus, -sg * g0 + cg * s_minus]
    ).astype(complex)
    energies = np.array([d - Om_e, d + Om_e, d - Om_g, d + Om_g]) / 2.0
    q0, qz, qx = charge_coefficients_from_angles(th_e, th_g)
    return RxEigenmodel(
        delta=float(d), t_c=float(tc), theta_e=float(th_e), theta_g=float(th_g),
        Omega_e=float(Om_e), Omega_g=float(Om_g), omega=float((Om_g - Om_e) / 2),
        q0=q0, qz=qz, qx=qx, eigenvectors=vecs, energies=energies,
    )


def charge_coefficients(m):
    """(q0, qz, qx) of the outer-dot number operators in the qubit basis."""
    return charge_coefficients_from_angles(m.theta_e, m.theta_g)


def number_operator(m, which, basis="eigen4"):
    """Occupation of outer dot 1 or 3 in the requested basis.

    ``qubit2`` is the two-level projection q0 - qz sz +/- qx sx, with the
    plus sign for dot 1 and the minus sign for dot 3.
    """
    if which not in (1, 3):
        raise ValueError(f"outer dot index must be 1 or 3, got {which}")
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    n = np.diag([1.0, 1.0, 2.0, 1.0] if which == 1 else [1.0, 1.0, 1.0, 2.0]).astype(complex)
    if basis == "original":
        return n
    if basis == "symmetrized":
        s = symmetrizer()
        return s.conj().T @ n @ s
    if basis == "eigen4":
        v = m.eigenvectors
        return v.conj().T @ n @ v
    q0, qz, qx = charge_coefficients(m)
    sign = 1.0 if which == 1 else -1.0
    return q0 * I2 - qz * SZ + sign * qx * SX


def perturbative_frequency(p):
    """Small-tunnelling estimate t_c^2 / delta (diagnostic only)."""
    return p.t_c ** 2 / p.delta


def two_level_ratio(m):
    """omega / Omega_e; the two-level reduction needs this well below 1."""
    return m.omega / m.Omega_e


@dataclass(frozen=True)
class SpectrumTable:
    """Energies with the uniform delta/2 shift removed, versus delta/t_c."""

    delta_over_tc: np.ndarray
    minus_g: np.ndarray
    minus_e: np.ndarray
    plus_e: np.ndarray
    plus_g: np.ndarray

    def rows(self):
        return np.column_stack([self.delta_over_tc, self.minus_g, self.minus_e, self.plus_e, self.plus_g])


def spectrum_sweep(t_c, delta_values):
    """Closed-form branch energies +/-Omega_{e,g}/2 over a delta grid.

    ``delta_values`` are absolute detunings (rad/ns, zero allowed); the
    table reports them in units of ``t_c``.
    """
    d = np.asarray(delta_values, dtype=float)
    if np.any(d < 0):
        raise ValueError("delta values must be non-negative")
    if t_c <= 0:
        raise ValueError("t_c must be positive for a spectrum sweep")
    om_e = np.hypot(d, SQRT2 * t_c)
    om_g = np.hypot(d, np.sqrt(6.0) * t_c)
    return SpectrumTable(d / t_c, -om_g / 2, -om_e / 2, om_e / 2, om_g / 2)
