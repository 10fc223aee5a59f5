"""Capacitive coupling strengths from dot geometry.

The mediator sits at the origin and the nearest qubit dot at (-a, 0).
Closed forms come from expanding 1/|r - r'| to quadrupole order; the
numeric oracle integrates the full Coulomb kernel against Gaussian and
Fock-Darwin densities instead.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import GeometryOutOfRange, QuadratureNonConvergence
from .mediator_dot import rabi_frequency
from .units import COULOMB_EV_NM, EPS_SI, ev_to_radns

ORACLE_RTOL = 1e-4
SW_REGIME_RATIO = 0.3


@dataclass(frozen=True)
class GeometryParams:
    """Mediator size ``lam``, centre distance ``a`` and qubit-dot width ``sigma``, all nm."""

    lam: float
    a: float
    sigma: float = 20.0
    relative_permittivity: float = EPS_SI

    @property
    def aspect(self):
        return self.lam / (2.0 * self.a)

    def check(self):
        if not (self.a > 0 and self.lam >= 0 and self.sigma >= 0):
            raise GeometryOutOfRange("lengths must be positive")
        if self.aspect >= 0.5:
            raise GeometryOutOfRange(f"lambda/2a = {self.aspect:.3f} must stay below 0.5")
        if self.aspect > 0.25:
            warnings.warn(f"lambda/2a = {self.aspect:.3f}: multipole expansion is loose", stacklevel=3)
        if self.lam > 0 and self.sigma > self.lam / 4:
            warnings.warn("sigma > lambda/4: point-charge qubit-dot approximation is loose", stacklevel=3)
        return self

    @property
    def coulomb_ev_nm(self):
        return COULOMB_EV_NM / self.relative_permittivity


@dataclass(frozen=True)
class CouplingStrengths:
    """Qubit-mediator Coulomb strengths in rad/ns."""

    K1: float
    K2: float
    K0: float
    DeltaK: float
    kappa: float
    K_m: float

    @classmethod
    def from_matrix_elements(cls, K1, K2, kappa):
        return cls(K1=K1, K2=K2, K0=(3.0 * K1 + K2) / 2.0, DeltaK=K2 - K1,
                   kappa=kappa, K_m=np.sqrt(2.0) * kappa)

    def scaled(self, factor):
        """Every strength multiplied by ``factor`` (0 switches coupling off)."""
        return CouplingStrengths.from_matrix_elements(self.K1 * factor, self.K2 * factor, self.kappa * factor)


def multipole_strengths(g):
    g.check()
    lam, a = g.lam, g.a
    pref = g.coulomb_ev_nm
    k1 = ev_to_radns(pref * (1.0 / a + lam ** 2 / (2 * a ** 3)))
    k2 = ev_to_radns(pref * (1.0 / a + lam ** 2 / a ** 3))
    kappa = ev_to_radns(pref * lam / (np.sqrt(2.0) * a ** 2))
    out = CouplingStrengths.from_matrix_elements(k1, k2, kappa)
    # the difference straight from the quadrupole term avoids cancellation
    dk = ev_to_radns(pref * lam ** 2 / (2 * a ** 3))
    return CouplingStrengths(out.K1, out.K2, out.K0, dk, out.kappa, out.K_m)


def _relative_density(g, which):
    """Density of the separation u = r' - r, in nm^-2, centred at (a, 0).

    Convolving the Gaussian qubit density (variance sigma^2) with the
    mediator orbital densities gives closed forms with s^2 = lam^2 + sigma^2.
    For ``kappa`` the density is the transition density psi_c1* psi_c2,
    whose imaginary part integrates to zero against 1/|u|.
    """
    lam, a, sig = g.lam, g.a, g.sigma
    s2 = lam * lam + sig * sig

    def gauss(vx, vy):
        return np.exp(-(vx * vx + vy * vy) / (2 * s2)) / (2 * np.pi * s2)

    if which == "K1":
        return lambda ux, uy: gauss(ux - a, uy)
    if which == "K2":
        def dens(ux, uy):
            v2 = (ux - a) ** 2 + uy ** 2
            return gauss(ux - a, uy) * (1.0 - lam * lam / s2 + lam * lam * v2 / (2 * s2 * s2))
        return dens
    if which == "kappa":
        return lambda ux, uy: gauss(ux - a, uy) * lam / (np.sqrt(2.0) * s2) * (ux - a)
    raise ValueError(f"unknown matrix element {which!r}")


def coulomb_integral(g, which, rtol=1e-10):
    """Integral of density/|u| in nm^-1, by adaptive quadrature in polar coordinates.

    Polar coordinates about u = 0 cancel the Coulomb singularity against the
    Jacobian; the integrand is mirror symmetric in the angle.
    """
    dens = _relative_density(g, which)
    s = np.hypot(g.lam, g.sigma)
    r_lo = max(0.0, g.a - 14.0 * s)
    r_hi = g.a + 14.0 * s
    half_width = np.pi if r_lo == 0.0 else min(np.pi, 16.0 * s / r_lo + 1e-3)

    def f(phi, rho):
        return dens(rho * np.cos(phi), rho * np.sin(phi))

    val, err = integrate.dblquad(f, r_lo, r_hi, 0.0, half_width, epsabs=0.0, epsrel=rtol)
    val, err = 2.0 * val, 2.0 * err
    if not np.isfinite(val) or err > ORACLE_RTOL * abs(val):
        raise QuadratureNonConvergence(f"{which}: estimate {val:.6g} with error {err:.2e}")
    return val


def numeric_coulomb_oracle(g, which):
    """Coulomb matrix element without multipole truncation, in rad/ns."""
    if g.a <= 0:
        raise GeometryOutOfRange("a must be positive")
    integral = coulomb_integral(g, which)
    if which == "kappa":
        # kappa is minus the transition matrix element
        integral = -integral
    return ev_to_radns(g.coulomb_ev_nm * integral)


def gaussian_k1_closed_form(g):
    """Exact monopole integral for two Gaussians: sqrt(pi/2)/s * exp(-z) I0(z), z = a^2/4s^2."""
    s = np.hypot(g.lam, g.sigma)
    z = g.a ** 2 / (4 * s * s)
    return ev_to_radns(g.coulomb_ev_nm * np.sqrt(np.pi / 2) / s * special.ive(0, z))


@dataclass(frozen=True)
class QubitQubitCoupling:
    Omega_s: float
    Omega_d: float
    K_ab: float
    Omega_M_prime: float
    theta_s: float
    theta_d: float


def qubit_qubit_strength(c, qz_a, qz_b, Omega_M):
    """Drive-activated coupling from the conditional mediator splittings."""
    if not Omega_M > 0:
        raise ValueError("the coupling is drive activated: Omega_M must be positive")
    xs = (qz_a + qz_b) * c.DeltaK
    xd = (qz_a - qz_b) * c.DeltaK
    om_s = np.hypot(Omega_M, xs)
    om_d = np.hypot(Omega_M, xd)
    # (Om_s - Om_d)/4 rewritten without the subtraction
    k_ab = qz_a * qz_b * c.DeltaK ** 2 / (om_s + om_d)
    return QubitQubitCoupling(
        Omega_s=float(om_s), Omega_d=float(om_d), K_ab=float(k_ab),
        Omega_M_prime=float(0.5 * (om_s + om_d)),
        theta_s=float(np.arctan2(xs, Omega_M)), theta_d=float(np.arctan2(xd, Omega_M)),
    )


def schrieffer_wolff_strength(c, qz_a, qz_b, Omega_M):
    return qz_a * qz_b * c.DeltaK ** 2 / (2.0 * Omega_M)


SWEEP_COLUMNS = ("lambda_nm", "a_nm", "K1", "K2", "DeltaK", "Omega_M", "K_ab", "K_ab_sw",
                 "sw_ratio", "sw_regime", "valid")


def default_lambda_grid():
    return np.arange(50.0, 300.0 + 1e-9, 10.0)


DEFAULT_A_VALUES = (400.0, 500.0, 600.0, 800.0)


def _sweep_point(lam, a, field, qz_a, qz_b, sigma, eps_r):
    g = GeometryParams(lam, a, sigma, eps_r)
    if g.aspect >= 0.5:
        nan = float("nan")
        return (lam, a, nan, nan, nan, nan, nan, nan, nan, False, False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = multipole_strengths(g)
    om = rabi_frequency(lam, field)
    if c.DeltaK == 0.0 or om == 0.0:
        k_ab = k_sw = 0.0
        ratio = 0.0
    else:
        k_ab = qubit_qubit_strength(c, qz_a, qz_b, om).K_ab
        k_sw = schrieffer_wolff_strength(c, qz_a, qz_b, om)
        ratio = abs(qz_a + qz_b) * c.DeltaK / om
    return (lam, a, c.K1, c.K2, c.DeltaK, om, k_ab, k_sw, ratio, ratio < SW_REGIME_RATIO, True)


def coupling_sweep(lambda_values, a_values, field, qz_a, qz_b, sigma=20.0, eps_r=EPS_SI):
    """Rows of SWEEP_COLUMNS ordered by (a, lambda); invalid geometries flagged, not dropped."""
    rows = []
    for a in sorted(a_values):
        for lam in sorted(lambda_values):
            rows.append(_sweep_point(float(lam), float(a), field, qz_a, qz_b, sigma, eps_r))
    return rows
