"""Unit conventions.

Everything internal uses hbar = 1 with angular frequencies in rad/ns and
times in ns.  Frequencies quoted as "2 pi x f" are converted with the
helpers below, so ``ghz(4.9)`` is the angular frequency 2 pi x 4.9 GHz.
"""

import math

TWO_PI = 2.0 * math.pi

#: e^2 / (4 pi eps0) in eV nm
COULOMB_EV_NM = 1.439964
#: 1 ueV corresponds to 241.799 MHz (ordinary frequency)
MHZ_PER_UEV = 241.799
#: relative permittivity of silicon
EPS_SI = 11.7


def ghz(f):
    """2 pi x f GHz -> rad/ns."""
    return TWO_PI * f


def mhz(f):
    """2 pi x f MHz -> rad/ns."""
    return TWO_PI * f * 1e-3


def to_ghz(w):
    """rad/ns -> f such that w = 2 pi x f GHz."""
    return w / TWO_PI


def to_mhz(w):
    return w / TWO_PI * 1e3


def ev_to_radns(energy_ev):
    """Energy in eV -> angular frequency in rad/ns."""
    return energy_ev * 1e6 * MHZ_PER_UEV * TWO_PI * 1e-3


def radns_to_ev(w):
    return w / (1e6 * MHZ_PER_UEV * TWO_PI * 1e-3)
