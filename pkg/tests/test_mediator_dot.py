import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from qde import mediator_dot as md
from qde.errors import ValidityViolation
from qde.units import ghz, mhz


def test_rabi_from_constants():
    expected = sc.e * 200e-9 * 2.0 / sc.hbar * 1e-9
    assert md.rabi_frequency(200.0, 2.0) == pytest.approx(expected, rel=1e-6)


def test_drive_rejects_inconsistent_rabi():
    with pytest.raises(ValueError):
        md.DriveParams(rabi=1.0, field_amplitude=2.0, lam=200.0)


@pytest.mark.parametrize("lam", [50.0, 200.0])
def test_dipole_quadrature_matches_closed_form(lam):
    dx, dy = md.dipole_matrix_elements(lam)
    assert md.dipole_quadrature(lam, component="x") == pytest.approx(dx, rel=1e-6)
    assert md.dipole_quadrature(lam, component="y") == pytest.approx(dy, rel=1e-6)


def test_orbitals_normalized():
    from scipy import integrate
    for f in (md.psi_c1, md.psi_c2):
        val, _ = integrate.dblquad(lambda r, th: abs(f(r * np.cos(th), r * np.sin(th), 1.0)) ** 2 * r,
                                   0, 2 * np.pi, 0, 10)
        assert val == pytest.approx(1.0, rel=1e-8)


def test_exchange_bookkeeping():
    p = md.MediatorParams.from_exchange(ghz(16.0), ghz(6.0), 200.0)
    assert p.delta_T == pytest.approx(ghz(4.0))
    assert p.j_c == pytest.approx(ghz(6.0))
    with pytest.raises(ValueError):
        md.MediatorParams(omega_s=1.0, delta_T=2.0, lam=200.0)


def test_five_state_rwa_error_scales_with_drive():
    p = md.MediatorParams.from_exchange(ghz(16.0), ghz(6.0), 200.0)
    out = []
    for rabi in (ghz(0.2), ghz(0.4)):
        d = md.DriveParams(rabi=rabi, omega_d=p.omega_s)
        dist, scale = md.rwa_deviation_5(p, d)
        assert dist < 2 * np.pi * scale
        out.append(dist)
    # Bloch-Siegert type error grows with the drive
    assert out[1] > out[0]


def test_triplets_decouple_at_reference_drive():
    p = md.MediatorParams.from_exchange(ghz(16.0), ghz(6.0), 200.0)
    d = md.DriveParams.from_field(2.0, 200.0, omega_d=p.omega_s)
    rep = md.two_level_validity(p, d)
    assert rep.passed and rep.ratio < 0.01
    tl = md.effective_two_level(p, d)
    assert np.allclose(tl.n_c1 + tl.n_c2, 2 * np.eye(2))


def test_resonant_triplet_drive_is_rejected():
    p = md.MediatorParams.from_exchange(ghz(16.0), mhz(1.0), 200.0)
    d = md.DriveParams(rabi=ghz(0.1), omega_d=p.delta_T)
    with pytest.raises(ValidityViolation):
        md.effective_two_level(p, d)


@given(st.floats(0, 1.0))
@settings(max_examples=30, deadline=None)
def test_ratio_classification_is_monotone(r):
    level = md.classify_ratio(r).level
    assert level == ("ok" if r < 0.1 else "marginal" if r <= 0.3 else "invalid")


def test_dressed_rwa_diagonal_on_resonance():
    p = md.MediatorParams.from_exchange(ghz(16.0), ghz(6.0), 200.0)
    d = md.DriveParams(rabi=mhz(97.0), omega_d=p.omega_s)
    h = md.dressed_rwa_5(p, d)
    singlets = h[np.ix_([0, 1], [0, 1])]
    assert np.allclose(singlets, np.diag(np.diag(singlets)), atol=1e-12)
    assert abs(singlets[0, 0] - singlets[1, 1]) == pytest.approx(mhz(97.0))
