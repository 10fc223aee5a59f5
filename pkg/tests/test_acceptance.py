"""Acceptance criteria at their stated tolerances.

Each sub-check prints one PASS/FAIL line (collected again in the pytest
terminal summary); a criterion's test fails if any of its lines fail.
"""

import time
import warnings

import numpy as np
import pytest

from qde import charge_stability as cs
from qde import coulomb_coupling as cc
from qde import effective_model as em
from qde import lindblad_engine as le
from qde.cli import above, absolute, below, rel, Check
from qde.units import mhz, to_ghz, to_mhz

REFERENCE_NOISE = le.NoiseParams.symmetric(le.REFERENCE_GAMMA, le.REFERENCE_GAMMA_M)


def flag(name, ok, detail=""):
    return Check(f"{name} {detail}".strip(), float(ok), 1.0, 0.0, bool(ok), "absolute")


def runtime(name, seconds, limit):
    return below(f"{name} runtime [s]", seconds, limit)


def conclude(report, tag, checks):
    for ch in checks:
        report(f"[{tag}] {ch.line()}")
    failed = [ch.name for ch in checks if not ch.passed]
    assert not failed, f"{tag} failed: {failed}"


def test_criterion_1_coupling_point(report):
    t0 = time.perf_counter()
    dev = em.build_device()
    c, p, q = dev.coupling, dev.params, dev.rx_a
    elapsed = time.perf_counter() - t0
    conclude(report, "C1", [
        absolute("q_z", q.qz, 0.022, 0.001),
        rel("K1 [2pi GHz]", to_ghz(c.K1), 64.0, 0.02),
        rel("K2 [2pi GHz]", to_ghz(c.K2), 69.0, 0.02),
        rel("DeltaK [2pi GHz]", to_ghz(c.DeltaK), 4.8, 0.02),
        rel("Omega_M [2pi MHz]", to_mhz(p.Omega_M), 97.0, 0.01),
        rel("K_ab [2pi MHz]", to_mhz(p.K_ab), 34.0, 0.03),
        runtime("coupling point", elapsed, 1.0),
    ])


def test_criterion_2_frequency_audit(report):
    t0 = time.perf_counter()
    dev = em.build_device(r=-100)
    c, p, q = dev.coupling, dev.params, dev.rx_a
    ratios = em.rwa_ratios(p)
    elapsed = time.perf_counter() - t0
    conclude(report, "C2", [
        rel("omega [2pi GHz]", to_ghz(q.omega), 4.9, 0.02),
        rel("2 q_z K0 [2pi GHz]", to_ghz(2 * q.qz * c.K0), 5.8, 0.03),
        rel("(q0a+q0b) DeltaK [2pi GHz]", to_ghz((dev.rx_a.q0 + dev.rx_b.q0) * c.DeltaK), 10.0, 0.05),
        rel("omega_s [2pi GHz]", to_ghz(dev.mediator.omega_s), 16.0, 0.05),
        rel("|delta_a| [2pi GHz]", to_ghz(abs(p.delta_a)), 27.0, 0.05),
        rel("|delta_b| [2pi GHz]", to_ghz(abs(p.delta_b)), 27.0, 0.05),
        below("max Omega_M/|delta (+/- Omega_M)|", max(ratios.values()), 0.01),
        runtime("frequency audit", elapsed, 1.0),
    ])


def test_criterion_3_gate_identity(report, device):
    t0 = time.perf_counter()
    p = device.params
    dist = em.gate_distance(device)
    elapsed = time.perf_counter() - t0
    conclude(report, "C3", [
        absolute("delta_a / (8 r K_ab)", p.delta_a / (8 * device.r * p.K_ab), 1.0, 1e-12),
        below("phase-optimized |exp(-i H_- t_g) - U_xx|", dist, 1e-9),
        rel("t_g [ns]", device.t_gate, 3.7, 0.03),
        rel("T2*/t_g", le.t2_star_over_gate(device.t_gate), 950.0, 0.05),
        runtime("gate identity", elapsed, 1.0),
    ])


def test_criterion_4_fidelity_surface(report, device):
    p = device.params
    t0 = time.perf_counter()
    grid = mhz(1.0) * np.linspace(0.0, 1.0, 21)
    fmap = le.fidelity_map(grid, grid, p)
    map_time = time.perf_counter() - t0
    f_point = le.gate_fidelity(REFERENCE_NOISE, p)[0]
    d_gamma, d_gamma_m = le.sensitivity(p)
    coop = le.cooperativity(p.K_ab, REFERENCE_NOISE.gamma_a, REFERENCE_NOISE.gamma_M)
    coop_literal = le.cooperativity(mhz(34.0), REFERENCE_NOISE.gamma_a, REFERENCE_NOISE.gamma_M)
    report(f"[C4] info cooperativity with the quoted K_ab = 2pi x 34 MHz: {coop_literal:.5g}")
    conclude(report, "C4", [
        absolute("F(0,0)", fmap.F[0, 0], 1.0, 1e-6),
        above("F at 2pi x (0.25, 0.37) MHz", f_point, 0.99),
        rel("gamma threshold [2pi MHz]", le.fidelity_threshold(p, "gamma") / mhz(1.0), 0.43, 0.10),
        rel("gamma_M threshold [2pi MHz]", le.fidelity_threshold(p, "gamma_M") / mhz(1.0), 0.87, 0.10),
        flag("dF/dgamma < dF/dgamma_M < 0", d_gamma < d_gamma_m < 0,
             f"({d_gamma:.3g} vs {d_gamma_m:.3g} per rad/ns)"),
        flag("map monotone in both rates", fmap.monotone),
        rel("cooperativity", coop, 1.3e4, 0.05),
        runtime("21x21 fidelity map", map_time, 300.0),
    ])


@pytest.fixture(scope="module")
def leakage_runs():
    out = {}
    for name, scale in (("device", 1.0), ("control", 0.0)):
        dev = em.build_device(coupling_scale=scale)
        t0 = time.perf_counter()
        res, completeness = le.leakage_simulation(dev, REFERENCE_NOISE)
        out[name] = (res, completeness, time.perf_counter() - t0)
    return out


def test_criterion_5_leakage(report, leakage_runs):
    res, completeness, elapsed = leakage_runs["device"]
    ctrl, ctrl_completeness, ctrl_time = leakage_runs["control"]
    report(f"[C5] info {res.steps} RK4 steps, refinement change {res.refinement_change:.1e}, "
           f"trace drift {res.max_trace_drift:.1e}, backend {res.backend}")
    conclude(report, "C5", [
        below("max L over 9 t_g", float(np.max(res.values)), 0.13),
        absolute("zero-coupling control max |L|", float(np.max(np.abs(ctrl.values))), 0.0, 1e-8),
        absolute("P + Q - 1", max(completeness, ctrl_completeness), 0.0, 1e-12),
        runtime("leakage run", elapsed, 60.0),
        runtime("control run", ctrl_time, 60.0),
    ])


def test_criterion_6_frame_cascade(report, cascade, device):
    ck = cascade.checks
    unitarity = max(ck["unitarity_U_s"], ck["unitarity_U_d"], ck["unitarity_U_q"])
    rng = np.random.default_rng(2024)
    gaps = []
    for _ in range(3):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        gaps.append(le.frame_equivalence(REFERENCE_NOISE, device.params, le.pure_state(v), device.t_gate))
    g = cc.GeometryParams(50.0, 500.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        k1_oracle = cc.numeric_coulomb_oracle(g, "K1")
        k1_multipole = cc.multipole_strengths(g).K1
    report(f"[C6] info RWA dropped terms: " + ", ".join(
        f"{to_ghz(d.frequency):+.2f} GHz (|h| = {to_ghz(d.magnitude):.3f})" for d in cascade.rwa_report.dropped))
    conclude(report, "C6", [
        below("max unitarity error of U_s, U_d, U_q", unitarity, 1e-10),
        below("H_q cross-branch residual", ck["cross_branch_residual"], 1e-10),
        below("H_- block vs closed form", ck["h_minus_vs_formula"], 1e-10),
        below("RWA propagator infidelity over t_g", ck["rwa_infidelity_t_gate"], 1e-3),
        below("dressed vs diagonal master equation", max(gaps), 1e-8),
        below("multipole K1 vs Coulomb quadrature (lambda/2a = 0.05)", abs(k1_multipole - k1_oracle) / k1_oracle, 1e-3),
    ])


def test_criterion_7_charge_stability(report):
    t0 = time.perf_counter()
    rx_map = cs.stability_diagram("rx")
    center_map = cs.stability_diagram("center")
    elapsed = time.perf_counter() - t0
    named = {cs.ChargeConfig(t) for t in ((1, 1, 1), (2, 0, 1), (1, 0, 2))}
    center = cs.center_ground_config(0.0, -0.98)[0]
    residual = cs.operation_point_constraint(-0.98, 2.1, 0.22, 0.90).residual
    conclude(report, "C7", [
        flag("rx regions include (1,1,1), (2,0,1), (1,0,2)", named <= set(rx_map.regions())),
        flag("rx (1,1,1) borders (2,0,1) and (1,0,2)", {frozenset({cs.ChargeConfig((1, 1, 1)), n})
                                                      for n in named - {cs.ChargeConfig((1, 1, 1))}}
             <= rx_map.adjacent_pairs()),
        flag("centre ground (1,2,1) at V_mc = -0.98 U", center == cs.ChargeConfig((1, 2, 1))),
        absolute("operation-point residual", residual, 0.0, 1e-12),
        absolute("rx mirror mismatches (401x401)", cs.mirror_mismatches(rx_map), 0, 0),
        absolute("centre mirror mismatches (401x401)", cs.mirror_mismatches(center_map), 0, 0),
        runtime("both 401x401 diagrams", elapsed, 30.0),
    ])
