import warnings

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from qde import coulomb_coupling as cc
from qde.errors import GeometryOutOfRange
from qde.units import mhz, to_ghz

# numeric Coulomb quadrature at lambda = 50 nm, a = 500 nm, sigma = 20 nm (units of 2pi GHz)
ORACLE_K1_GHZ = 59.872951391750156
ORACLE_K2_GHZ = 60.18732456021577
ORACLE_KAPPA_GHZ = 4.285229526500783

QZ = 0.022024425519096003


def coulomb_radns(length_nm, eps_r=11.7):
    """e^2 / (4 pi eps0 eps_r L) / hbar in rad/ns, from CODATA constants."""
    energy = sc.e ** 2 / (4 * np.pi * sc.epsilon_0 * eps_r * length_nm * 1e-9)
    return energy / sc.hbar * 1e-9


@pytest.fixture(scope="module")
def small_aspect():
    return cc.GeometryParams(50.0, 500.0)


def quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*args)


def test_multipole_against_constants():
    c = cc.multipole_strengths(cc.GeometryParams(200.0, 500.0, sigma=20.0))
    base = coulomb_radns(500.0)
    q = (200.0 / 500.0) ** 2
    assert c.K1 == pytest.approx(base * (1 + q / 2), rel=1e-6)
    assert c.K2 == pytest.approx(base * (1 + q), rel=1e-6)
    assert c.DeltaK == pytest.approx(base * q / 2, rel=1e-6)
    assert c.K0 == pytest.approx((3 * c.K1 + c.K2) / 2)


@pytest.mark.parametrize("which,frozen", [("K1", ORACLE_K1_GHZ), ("K2", ORACLE_K2_GHZ),
                                          ("kappa", ORACLE_KAPPA_GHZ)])
def test_quadrature_oracle_frozen(small_aspect, which, frozen):
    assert to_ghz(quiet(cc.numeric_coulomb_oracle, small_aspect, which)) == pytest.approx(frozen, rel=1e-8)


def test_quadrature_matches_gaussian_closed_form(small_aspect):
    num = quiet(cc.numeric_coulomb_oracle, small_aspect, "K1")
    assert num == pytest.approx(cc.gaussian_k1_closed_form(small_aspect), rel=1e-10)


def test_multipole_k1_within_oracle_tolerance(small_aspect):
    assert small_aspect.aspect == pytest.approx(0.05)
    mp = quiet(cc.multipole_strengths, small_aspect).K1
    assert abs(mp - ORACLE_K1_GHZ * 2 * np.pi) / (ORACLE_K1_GHZ * 2 * np.pi) <= 1e-3


def test_point_charge_limit():
    g = cc.GeometryParams(1e-3, 500.0, sigma=0.5)
    num = quiet(cc.numeric_coulomb_oracle, g, "K1")
    assert num == pytest.approx(coulomb_radns(500.0), rel=1e-5)


def test_geometry_limits():
    with pytest.raises(GeometryOutOfRange):
        cc.multipole_strengths(cc.GeometryParams(500.0, 500.0))
    with pytest.warns(UserWarning):
        cc.multipole_strengths(cc.GeometryParams(300.0, 500.0))


def rwa_block_coupling(c, qz_a, qz_b, omega_m):
    """ZZ coefficient on the lower dressed branch from numerical 2x2 eigenvalues."""
    low = {}
    for za in (1, -1):
        for zb in (1, -1):
            x = c.DeltaK * (qz_a * za + qz_b * zb)
            h = np.array([[omega_m / 2, x / 2], [x / 2, -omega_m / 2]])
            low[za, zb] = np.linalg.eigvalsh(h)[0]
    return -(low[1, 1] + low[-1, -1] - low[1, -1] - low[-1, 1]) / 4


@given(st.floats(60.0, 240.0), st.floats(400.0, 800.0), st.floats(10.0, 300.0))
@settings(max_examples=40, deadline=None)
def test_qubit_qubit_strength_matches_eigenvalues(lam, a, omega_mhz):
    c = quiet(cc.multipole_strengths, cc.GeometryParams(lam, a))
    res = cc.qubit_qubit_strength(c, QZ, QZ, mhz(omega_mhz))
    assert res.K_ab == pytest.approx(rwa_block_coupling(c, QZ, QZ, mhz(omega_mhz)), rel=1e-8)
    # Schrieffer-Wolff is an upper bound that becomes tight for weak coupling
    assert res.K_ab <= cc.schrieffer_wolff_strength(c, QZ, QZ, mhz(omega_mhz)) * (1 + 1e-12)


def test_strength_needs_drive():
    c = cc.multipole_strengths(cc.GeometryParams(200.0, 500.0))
    with pytest.raises(ValueError):
        cc.qubit_qubit_strength(c, QZ, QZ, 0.0)


@given(st.floats(0.0, 3.0))
@settings(max_examples=20, deadline=None)
def test_scaling_is_linear(f):
    c = cc.multipole_strengths(cc.GeometryParams(200.0, 500.0))
    s = c.scaled(f)
    assert s.K0 == pytest.approx(f * c.K0, abs=1e-12)
    assert s.K_m == pytest.approx(f * c.K_m, abs=1e-12)


def test_sweep_shape_and_flags():
    rows = cc.coupling_sweep([0.0, 100.0, 600.0], [500.0], 2.0, QZ, QZ)
    assert [r[0] for r in rows] == [0.0, 100.0, 600.0]
    assert rows[0][6] == 0.0 and rows[0][10]
    assert not rows[2][10] and np.isnan(rows[2][2])
    assert all(len(r) == len(cc.SWEEP_COLUMNS) for r in rows)
    default = cc.coupling_sweep(cc.default_lambda_grid(), cc.DEFAULT_A_VALUES, 2.0, QZ, QZ)
    assert len(default) == 26 * 4


def test_sweep_coupling_grows_with_dot_size():
    rows = cc.coupling_sweep(cc.default_lambda_grid(), [500.0], 2.0, QZ, QZ)
    k = [r[6] for r in rows]
    assert np.all(np.diff(k) > 0)
    assert to_ghz(rows[0][2]) > 0
