"""Driven two-level, two-electron mediator dot.

Five low-lying states are kept, ordered ``(S11, S12, T-, T0, T+)``: the
doubly occupied ground singlet, the singly occupied excited singlet and
the three singly occupied triplets.  The two-level reduction works in the
singlet pair ordered ``(S12, S11)`` so that tau_z = +1 on S12.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureNonConvergence, ValidityViolation
from .operator_algebra import I2, SX, SY, SZ, phase_distance, propagator
from .units import ev_to_radns

VALIDITY_THRESHOLD = 0.1
WARNING_BAND = (0.1, 0.3)
STATE_LABELS = ("S11", "S12", "T-", "T0", "T+")
S11, S12 = 0, 1
TRIPLETS = (2, 3, 4)


@dataclass(frozen=True)
class MediatorParams:
    """Singlet splitting and singlet-triplet gap (rad/ns), dot size (nm)."""

    omega_s: float
    delta_T: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"dot size must be positive, got {self.lam}")
        if not self.omega_s > self.delta_T:
            raise ValueError("omega_s must exceed delta_T (positive exchange J_c)")

    @property
    def j_c(self):
        return 0.5 * (self.omega_s - self.delta_T)

    @classmethod
    def from_exchange(cls, omega_s, j_c, lam):
        return cls(omega_s=omega_s, delta_T=omega_s - 2.0 * j_c, lam=lam)

    @classmethod
    def from_raw(cls, eps_c1, eps_c2, U_c, K_c, J_c, lam):
        omega_s = -(eps_c2 - eps_c1) - U_c + K_c + J_c
        return cls(omega_s=omega_s, delta_T=omega_s - 2.0 * J_c, lam=lam)


def rabi_frequency(lam_nm, field_v_per_m):
    """e * lambda * E in rad/ns."""
    return ev_to_radns(lam_nm * 1e-9 * field_v_per_m)


@dataclass(frozen=True)
class DriveParams:
    """AC drive on the mediator.  ``omega_d`` None means "resonant, set later"."""

    rabi: float
    omega_d: float = None
    phi: float = 0.0
    field_amplitude: float = None
    lam: float = None

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("Rabi frequency must be non-negative")
        if self.field_amplitude is not None and self.lam is not None:
            ref = rabi_frequency(self.lam, self.field_amplitude)
            if abs(ref - self.rabi) > 1e-12 * max(abs(ref), 1.0):
                raise ValueError(f"stored Rabi {self.rabi} disagrees with e*lambda*E = {ref}")

    @classmethod
    def from_field(cls, field_v_per_m, lam_nm, omega_d=None, phi=0.0):
        return cls(rabi=rabi_frequency(lam_nm, field_v_per_m), omega_d=omega_d, phi=phi,
                   field_amplitude=field_v_per_m, lam=lam_nm)

    def with_frequency(self, omega_d):
        return DriveParams(self.rabi, omega_d, self.phi, self.field_amplitude, self.lam)


def psi_c1(x, y, lam):
    return np.exp(-(x * x + y * y) / (4 * lam * lam)) / (np.sqrt(2 * np.pi) * lam)


def psi_c2(x, y, lam):
    return (x + 1j * y) * np.exp(-(x * x + y * y) / (4 * lam * lam)) / (2 * np.sqrt(np.pi) * lam * lam)


def dipole_matrix_elements(lam):
    """Closed-form <c2|x|c1> and <c2|y|c1> in nm."""
    if not lam > 0:
        raise ValueError("dot size must be positive")
    return lam / np.sqrt(2.0), -1j * lam / np.sqrt(2.0)


_ORBITALS = {"c1": psi_c1, "c2": psi_c2}


def dipole_quadrature(lam, bra="c2", ket="c1", component="x", rel_tol=1e-6):
    """<bra|component|ket> by adaptive 2D quadrature in polar coordinates.

    The radial range is cut at 8 lambda where the Gaussian tails are far
    below the requested tolerance.
    """
    fb, fk = _ORBITALS[bra], _ORBITALS[ket]

    def integrand(r, th, part):
        x, y = r * np.cos(th), r * np.sin(th)
        coord = x if component == "x" else y
        val = np.conj(fb(x, y, lam)) * coord * fk(x, y, lam) * r
        return val.real if part == 0 else val.imag

    out = []
    for part in (0, 1):
        val, err = integrate.dblquad(
            lambda r, th: integrand(r, th, part), 0.0, 2 * np.pi, 0.0, 8.0 * lam,
            epsabs=1e-8 * lam, epsrel=1e-10,
        )
        out.append((val, err))
    value = complex(out[0][0], out[1][0])
    err = abs(complex(out[0][1], out[1][1]))
    if err > max(rel_tol * abs(value), 1e-8 * lam):
        raise QuadratureNonConvergence(f"dipole quadrature error {err:.2e} for value {value}")
    return value


def singlet_embed(op2):
    """Embed a 2x2 operator on (S12, S11) into the five-state basis."""
    op5 = np.zeros((5, 5), dtype=complex)
    idx = (S12, S11)
    for i in range(2):
        for j in range(2):
            op5[idx[i], idx[j]] = op2[i, j]
    return op5


def triplet_projector():
    p = np.zeros((5, 5), dtype=complex)
    for k in TRIPLETS:
        p[k, k] = 1.0
    return p


def build_static_5(p):
    return np.diag([0.0, p.omega_s, p.delta_T, p.delta_T, p.delta_T]).astype(complex)


def dipole_operator_5(lam):
    """x-dipole d_x = -e lambda (|S12><S11| + h.c.), in e*nm."""
    return -lam * singlet_embed(SX)


def drive_hamiltonian_5(d, t):
    return d.rabi * np.cos(d.omega_d * t + d.phi) * singlet_embed(SX)


def lab_hamiltonian_5(p, d, t):
    return build_static_5(p) + drive_hamiltonian_5(d, t)


def rwa_rotating_5(p, d):
    """Rotating-frame five-state Hamiltonian after dropping 2 omega_d terms."""
    detuning = p.omega_s - d.omega_d
    if abs(detuning) > VALIDITY_THRESHOLD * abs(d.omega_d):
        warnings.warn(f"|omega_s - omega_d| = {abs(detuning):.3g} is not small against omega_d", stacklevel=2)
    h = np.zeros((5, 5), dtype=complex)
    h[S12, S12] = detuning
    h[S12, S11] = h[S11, S12] = d.rabi / 2
    h += (p.delta_T - d.omega_d) * triplet_projector()
    return h


def rotating_frame_unitary_5(omega_d, t):
    """exp(-i omega_d t (|S12><S12| + P_T))."""
    phases = np.exp(-1j * omega_d * t * np.array([0.0, 1.0, 1.0, 1.0, 1.0]))
    return np.diag(phases)


def dressing_rotation_5():
    """exp(-i pi tau_y / 4) on the singlets, identity on the triplets."""
    u2 = propagator(SY, np.pi / 4)
    u = singlet_embed(u2)
    for k in TRIPLETS:
        u[k, k] = 1.0
    return u


def dressed_rwa_5(p, d):
    u = dressing_rotation_5()
    return u.conj().T @ rwa_rotating_5(p, d) @ u


def lab_propagator_5(p, d, t_end, rtol=1e-11):
    """Propagator of the driven five-state Hamiltonian by adaptive ODE integration."""

    def rhs(t, y):
        u = y.reshape(5, 5)
        return (-1j * lab_hamiltonian_5(p, d, t) @ u).ravel()

    sol = integrate.solve_ivp(rhs, (0.0, t_end), np.eye(5, dtype=complex).ravel(),
                              method="DOP853", rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise QuadratureNonConvergence(sol.message)
    return sol.y[:, -1].reshape(5, 5)


def rwa_deviation_5(p, d, periods=1):
    """Phase-optimized distance between the exact and RWA rotating-frame propagators.

    Returns (distance, (rabi / omega_d)^2).  After whole drive periods the
    frame unitary is the identity, so the comparison is stroboscopic.
    """
    t_end = periods * 2 * np.pi / d.omega_d
    u_lab = lab_propagator_5(p, d, t_end)
    u_rf = rotating_frame_unitary_5(d.omega_d, t_end).conj().T @ u_lab
    u_rwa = propagator(rwa_rotating_5(p, d), t_end)
    return phase_distance(u_rf, u_rwa), (d.rabi / d.omega_d) ** 2


@dataclass(frozen=True)
class ValidityReport:
    ratio: float
    passed: bool
    level: str

    def as_dict(self):
        return {"ratio": self.ratio, "passed": self.passed, "level": self.level}


def classify_ratio(ratio, threshold=VALIDITY_THRESHOLD, band=WARNING_BAND):
    if ratio < threshold:
        return ValidityReport(float(ratio), True, "ok")
    if ratio <= band[1]:
        return ValidityReport(float(ratio), False, "marginal")
    return ValidityReport(float(ratio), False, "invalid")


def two_level_validity(p, d):
    """Rabi / |delta_T - omega_d|; the singlet-only description needs it small."""
    gap = abs(p.delta_T - d.omega_d)
    ratio = np.inf if gap == 0 else d.rabi / gap
    if d.rabi == 0:
        ratio = 0.0
    return classify_ratio(ratio)


@dataclass(frozen=True)
class TwoLevelMediator:
    """H(t) = (omega_s/2) tau_z + rabi cos(omega_d t + phi) tau_x on (S12, S11)."""

    omega_s: float
    rabi: float
    omega_d: float
    phi: float

    @property
    def static(self):
        return 0.5 * self.omega_s * SZ

    @property
    def drive_operator(self):
        return self.rabi * SX

    def at(self, t):
        return self.static + np.cos(self.omega_d * t + self.phi) * self.drive_operator

    @property
    def n_c1(self):
        return 1.5 * I2 - 0.5 * SZ

    @property
    def n_c2(self):
        return 0.5 * I2 + 0.5 * SZ


def effective_two_level(p, d):
    report = two_level_validity(p, d)
    if not report.passed:
        raise ValidityViolation(
            f"two-level reduction invalid: rabi/|delta_T - omega_d| = {report.ratio:.3g}",
            {"rabi_over_triplet_gap": report.ratio},
        )
    return TwoLevelMediator(p.omega_s, d.rabi, d.omega_d, d.phi)
