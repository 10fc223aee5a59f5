import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from qde import effective_model as em
from qde import lindblad_engine as le
from qde.errors import DivisionByZeroRate, InvariantBreach
from qde.operator_algebra import SX, SZ, kron
from qde.units import mhz

# scipy DOP853 integration of the same master equation (rtol 1e-11) at gamma, gamma_M = 2pi (0.25, 0.37) MHz
ORACLE_F_REFERENCE = 0.9898921332669093

REFERENCE_NOISE = le.NoiseParams.symmetric(le.REFERENCE_GAMMA, le.REFERENCE_GAMMA_M)


def random_state(seed, n):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return le.pure_state(v)


def test_dephasing_operator_matches_conjugation(device):
    p = device.params
    assert np.allclose(le.tx_formula(p.theta_s, p.theta_d), le.tx_conjugation(p.theta_s, p.theta_d), atol=1e-14)
    u_q = em.qubit_dressing()
    tx_q = u_q.conj().T @ le.tx_formula(p.theta_s, p.theta_d) @ u_q
    assert np.allclose(le.tx_tilde_formula(p.theta_s, p.theta_d), tx_q, atol=1e-14)


@pytest.mark.parametrize("frame", em.FRAME_TAGS)
def test_channels_square_to_identity(device, frame):
    for _, op in le.dissipator_operators(frame, device.params):
        m = le.as_phased(op).at(0.37)
        assert np.allclose(m @ m.conj().T, np.eye(8), atol=1e-12)


def test_fidelity_against_ode_oracle(device):
    f, res = le.gate_fidelity(REFERENCE_NOISE, device.params)
    assert f == pytest.approx(ORACLE_F_REFERENCE, abs=1e-8)
    assert res.max_trace_drift < 1e-6
    assert res.hermiticity_drift < 1e-8


def test_noiseless_gate_is_perfect(device):
    f, _ = le.gate_fidelity(le.NoiseParams(), device.params)
    assert f == pytest.approx(1.0, abs=1e-6)


def test_fidelity_falls_faster_in_qubit_dephasing(device):
    d_gamma, d_gamma_m = le.sensitivity(device.params)
    assert d_gamma < d_gamma_m < 0


def test_small_map_is_monotone_and_worker_independent(device, monkeypatch):
    monkeypatch.delenv("QDE_WORKERS", raising=False)
    grid = mhz(1.0) * np.array([0.0, 0.5, 1.0])
    serial = le.fidelity_map(grid, grid, device.params, workers=1, steps_per_gate=500)
    parallel = le.fidelity_map(grid, grid, device.params, workers=2, steps_per_gate=500)
    assert serial.monotone
    assert np.array_equal(serial.F, parallel.F)
    assert serial.F[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert np.all((serial.F >= 0) & (serial.F <= 1 + 1e-8))
    assert len(serial.rows()) == 9


def test_workers_env_override(monkeypatch):
    monkeypatch.setenv("QDE_WORKERS", "3")
    assert le.resolve_workers(1) == 3
    monkeypatch.delenv("QDE_WORKERS")
    assert le.resolve_workers(None) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=5, deadline=None)
def test_frame_equivalence(seed):
    p = em.build_device().params
    gap = le.frame_equivalence(REFERENCE_NOISE, p, random_state(seed, 8), 0.5)
    assert gap < 1e-8


def test_dephasing_keeps_populations():
    h = np.diag([0.3, -1.1, 2.0, 0.4]).astype(complex)
    ops = [(0.2, kron(SZ, np.eye(2))), (0.5, kron(np.eye(2), SZ))]
    rho0 = random_state(7, 4)
    res = le.evolve(h, ops, rho0, 5.0, n_steps=2000, samples=10)
    diag = np.real(np.einsum("kii->ki", res.snapshots))
    assert np.max(np.abs(diag - diag[0])) < 1e-10
    # coherences decay at (gamma_1 + gamma_2) for |11><00|
    expected = abs(rho0[0, 3]) * np.exp(-(0.2 + 0.5) * 5.0)
    assert abs(res.final_state[0, 3]) == pytest.approx(expected, rel=1e-8)


def test_time_dependent_operator_against_ode():
    h = PhasedOperator_drive()
    ops = [(0.3, SZ)]
    rho0 = random_state(3, 2)
    res = le.evolve(h, ops, rho0, 4.0, n_steps=400, tol=1e-10)

    def rhs(t, y):
        r = y.reshape(2, 2)
        hm = h.at(t)
        return (-1j * (hm @ r - r @ hm) + 0.15 * (SZ @ r @ SZ - r)).ravel()

    sol = solve_ivp(rhs, (0, 4.0), rho0.ravel(), method="DOP853", rtol=1e-12, atol=1e-14)
    assert np.allclose(res.final_state, sol.y[:, -1].reshape(2, 2), atol=1e-9)


def PhasedOperator_drive():
    return le.PhasedOperator.static(0.5 * SZ) + le.PhasedOperator.harmonic(0.8 * SX, 1.3, 0.2)


def test_rejects_non_unitary_channel():
    with pytest.raises(ValueError):
        le.evolve(SZ, [(0.1, 2 * SZ)], random_state(1, 2), 1.0, n_steps=10)


def test_rejects_bad_density():
    with pytest.raises(InvariantBreach):
        le.check_density(np.diag([1.2, -0.2]))


def test_cooperativity_and_diagnostics(device):
    assert le.cooperativity(mhz(34.0), le.REFERENCE_GAMMA, le.REFERENCE_GAMMA_M) == pytest.approx(1.2497e4, rel=1e-3)
    with pytest.raises(DivisionByZeroRate):
        le.cooperativity(mhz(34.0), 0.0, le.REFERENCE_GAMMA_M)
    assert le.t2_star_over_gate(device.t_gate) == pytest.approx(3500 / device.t_gate)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert REFERENCE_NOISE.dressed_basis_valid(device.params.Omega_M)
    with pytest.warns(UserWarning):
        le.NoiseParams(gamma_M=mhz(50.0)).dressed_basis_valid(device.params.Omega_M)


def test_leakage_projectors(device):
    p32 = le.computational_projector32()
    assert np.allclose(p32 @ p32, p32)
    assert np.trace(p32).real == 8
    psi = le.leakage_model(device).psi0
    assert np.vdot(psi, p32 @ psi).real == pytest.approx(1.0)


def test_leakage_zero_coupling_short_window():
    dev = em.build_device(coupling_scale=0.0)
    res, completeness = le.leakage_simulation(dev, t_max=dev.t_gate, refine=False)
    assert completeness < 1e-12
    assert np.max(np.abs(res.values)) < 1e-8


def test_leakage_counterpart_sensitivity(device):
    """Both four-level dephasing choices give the same leakage to within 1e-3 over one gate."""
    out = {}
    for name in le.SIGMA_Z_COUNTERPARTS:
        res, _ = le.leakage_simulation(device, t_max=device.t_gate, counterpart=name, refine=False)
        out[name] = res.values
    assert np.max(np.abs(out["branch"] - out["parity"])) < 1e-3
    assert np.all(out["branch"] >= -1e-12) and np.all(out["branch"] <= 1)
