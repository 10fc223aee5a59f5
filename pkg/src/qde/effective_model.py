"""Frame cascade from the driven qubit-mediator-qubit Hamiltonian to the XX gate.

Every space is qubit a (x) qubit b (x) mediator, 8 dimensional.  Each qubit
uses the (|1>, |0>) basis and the mediator the singlet pair (S12, S11).

Cascade: lab -> rotating -> dressed_singlet -> rwa -> diagonalized ->
dressed_qubit, with the low-energy branch giving the 4x4 gate Hamiltonian.
Unitary steps are plain conjugations; the two approximate steps (rotating
frame average and RWA) report what they dropped.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from . import coulomb_coupling as cc
from . import mediator_dot as md
from . import rx_qubit as rx
from .errors import ConditionViolation, QuadratureNonConvergence, ValidityViolation
from .operator_algebra import (
    I2, SX, SY, SZ, SP, SM, check_hermitian, hermitian_eig, kron, phase_distance, propagator,
    unitarity_error,
)
from .units import TWO_PI, ghz

FRAME_TAGS = ("lab", "rotating", "dressed_singlet", "rwa", "diagonalized", "dressed_qubit", "interaction")
DIMS = (2, 2, 2)
RWA_RATIO_LIMIT = 0.1
CONDITION_RTOL = 1e-9

I8 = np.eye(8, dtype=complex)


def on_a(op):
    return kron(op, I2, I2)


def on_b(op):
    return kron(I2, op, I2)


def on_m(op):
    return kron(I2, I2, op)


def qubit_ops(op):
    """(op on a, op on b)."""
    return on_a(op), on_b(op)


@dataclass(frozen=True)
class HarmonicTerm:
    """cos(omega t + phase) * operator."""

    operator: np.ndarray
    omega: float
    phase: float = 0.0

    def at(self, t):
        return np.cos(self.omega * t + self.phase) * self.operator


@dataclass(frozen=True)
class FrameHamiltonian:
    matrix: np.ndarray
    frame_tag: str
    drive: tuple = ()

    def __post_init__(self):
        if self.frame_tag not in FRAME_TAGS:
            raise ValueError(f"unknown frame tag {self.frame_tag!r}")
        check_hermitian(self.matrix)
        for term in self.drive:
            check_hermitian(term.operator)

    @property
    def time_dependent(self):
        return bool(self.drive)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def at(self, t=0.0):
        h = self.matrix.copy()
        for term in self.drive:
            h = h + term.at(t)
        return h

    def conjugated(self, u, tag):
        """u^dagger H u with the drive terms carried along."""
        ud = u.conj().T
        drive = tuple(replace(d, operator=ud @ d.operator @ u) for d in self.drive)
        return FrameHamiltonian(ud @ self.matrix @ u, tag, drive)


@dataclass(frozen=True)
class EffectiveSystemParams:
    omega_a_pr: float
    omega_b_pr: float
    omega_s_pr: float
    delta_a: float
    delta_b: float
    theta_s: float
    theta_d: float
    Omega_s: float
    Omega_d: float
    Omega_M_prime: float
    K_ab: float
    Omega_M: float
    omega_d: float


def shifted_frequencies(rx_a, rx_b, omega_s, cpl, Omega_M, omega_d=None):
    """Coupling-renormalized frequencies; the drive defaults to the shifted mediator resonance."""
    om_a = rx_a.omega - 2 * rx_a.qz * cpl.K0
    om_b = rx_b.omega - 2 * rx_b.qz * cpl.K0
    om_s = omega_s + (rx_a.q0 + rx_b.q0) * cpl.DeltaK
    wd = om_s if omega_d is None else omega_d
    if Omega_M > 0:
        qq = cc.qubit_qubit_strength(cpl, rx_a.qz, rx_b.qz, Omega_M)
        geo = (qq.theta_s, qq.theta_d, qq.Omega_s, qq.Omega_d, qq.Omega_M_prime, qq.K_ab)
    else:
        xs = (rx_a.qz + rx_b.qz) * cpl.DeltaK
        xd = (rx_a.qz - rx_b.qz) * cpl.DeltaK
        geo = (np.arctan2(xs, 0.0), np.arctan2(xd, 0.0), abs(xs), abs(xd), 0.5 * (abs(xs) + abs(xd)),
               0.25 * (abs(xs) - abs(xd)))
    th_s, th_d, o_s, o_d, o_mp, k_ab = geo
    return EffectiveSystemParams(
        omega_a_pr=float(om_a), omega_b_pr=float(om_b), omega_s_pr=float(om_s),
        delta_a=float(om_a - wd), delta_b=float(om_b - wd),
        theta_s=float(th_s), theta_d=float(th_d), Omega_s=float(o_s), Omega_d=float(o_d),
        Omega_M_prime=float(o_mp), K_ab=float(k_ab), Omega_M=float(Omega_M), omega_d=float(wd),
    )


def mediator_splitting_for_gate(rx_a, cpl, K_ab, r, rx_b=None):
    """Bare singlet splitting that puts qubit a at detuning 8 r K_ab from the resonant drive."""
    rx_b = rx_b or rx_a
    om_a = rx_a.omega - 2 * rx_a.qz * cpl.K0
    omega_d = om_a - 8 * r * K_ab
    return omega_d - (rx_a.q0 + rx_b.q0) * cpl.DeltaK


def gate_time(K_ab, m=0):
    return np.pi * (8 * m + 1) / (4 * K_ab)


@dataclass(frozen=True)
class DeviceModel:
    rx_a: rx.RxEigenmodel
    rx_b: rx.RxEigenmodel
    mediator: md.MediatorParams
    drive: md.DriveParams
    coupling: cc.CouplingStrengths
    params: EffectiveSystemParams
    r: int
    m: int
    t_gate: float

    @property
    def qx_signed(self):
        """Per-qubit x coefficients: qubit a couples through dot 3, qubit b through dot 1."""
        return self.rx_a.qx, -self.rx_b.qx


def build_device(delta=ghz(30.0), t_c=ghz(14.0), lam=200.0, a=500.0, field=2.0, r=-100, m=0,
                 j_c=ghz(6.0), sigma=20.0, eps_r=cc.EPS_SI, phi=0.0, coupling_scale=1.0, omega_s=None):
    """Reference device with the resonance and gate conditions imposed by construction.

    An explicit ``omega_s`` replaces the value implied by ``r``; the drive
    stays resonant but the detuning is then whatever follows.

    ``coupling_scale`` multiplies every Coulomb strength but keeps the
    mediator frequencies of the unscaled device, which is what a
    zero-coupling control needs.
    """
    if int(r) != r or int(m) != m:
        raise ValueError("r and m must be integers")
    r, m = int(r), int(m)
    qubit = rx.solve_symmetric(rx.RxParams(delta=delta, t_c=t_c))
    geo = cc.GeometryParams(lam, a, sigma, eps_r)
    cpl0 = cc.multipole_strengths(geo)
    drive = md.DriveParams.from_field(field, lam, phi=phi)
    qq = cc.qubit_qubit_strength(cpl0, qubit.qz, qubit.qz, drive.rabi)
    if omega_s is None:
        omega_s = mediator_splitting_for_gate(qubit, cpl0, qq.K_ab, r)
    cpl = cpl0.scaled(coupling_scale)
    # keep the unscaled drive frequency so the control differs only in coupling
    om_s_pr = omega_s + (2 * qubit.q0) * cpl0.DeltaK
    omega_s_ctrl = om_s_pr - 2 * qubit.q0 * cpl.DeltaK
    params = shifted_frequencies(qubit, qubit, omega_s_ctrl, cpl, drive.rabi, omega_d=om_s_pr)
    med = md.MediatorParams.from_exchange(omega_s_ctrl, j_c, lam)
    t_g = gate_time(qq.K_ab, m)
    return DeviceModel(qubit, qubit, med, drive.with_frequency(params.omega_d), cpl, params, r, m, t_g)


def coupling_factor(cpl):
    """K0 + (DeltaK/2) tau_z - K_m tau_x on the mediator."""
    return cpl.K0 * I2 + 0.5 * cpl.DeltaK * SZ - cpl.K_m * SX


def qubit_charge(model, qx_signed):
    return model.q0 * I2 - model.qz * SZ - qx_signed * SX


def build_h_l_eff(rx_a, rx_b, med, drv, cpl, qx_signed=None, omega_d=None):
    """Lab-frame effective Hamiltonian with its drive as a harmonic term."""
    if qx_signed is None:
        qx_signed = (rx_a.qx, -rx_b.qx)
    wd = drv.omega_d if omega_d is None else omega_d
    coupling = coupling_factor(cpl)
    h = 0.5 * rx_a.omega * on_a(SZ) + 0.5 * rx_b.omega * on_b(SZ) + 0.5 * med.omega_s * on_m(SZ)
    h = h + kron(qubit_charge(rx_a, qx_signed[0]), I2, coupling)
    h = h + kron(I2, qubit_charge(rx_b, qx_signed[1]), coupling)
    drive = (HarmonicTerm(drv.rabi * on_m(SX), wd, drv.phi),) if drv.rabi != 0 else ()
    return FrameHamiltonian(h, "lab", drive)


def device_lab(dev, rabi=None):
    drv = dev.drive if rabi is None else md.DriveParams(rabi, dev.drive.omega_d, dev.drive.phi)
    return build_h_l_eff(dev.rx_a, dev.rx_b, dev.mediator, drv, dev.coupling, dev.qx_signed)


def frame_generator_diag():
    """Diagonal of (sigma_z^a + sigma_z^b + tau_z)/2, in units of the frame frequency."""
    s = np.array([1.0, -1.0])
    return 0.5 * (s[:, None, None] + s[None, :, None] + s[None, None, :]).ravel()


@dataclass(frozen=True)
class DroppedTerm:
    harmonic: int
    frequency: float
    magnitude: float


def _fourier_components(h, omega_d):
    """Exact Fourier components of the lab Hamiltonian seen from the frame rotating at omega_d."""
    g = frame_generator_diag()
    # entry (i, j) of U^dagger X U oscillates at (g_i - g_j) * omega_d
    dg = np.rint(g[:, None] - g[None, :]).astype(int)
    comps = {}

    def add(n, mat):
        comps[n] = comps.get(n, 0) + mat

    for n in np.unique(dg):
        add(int(n), np.where(dg == n, h.matrix, 0))
    for term in h.drive:
        if not np.isclose(term.omega, omega_d, rtol=1e-12):
            raise ValueError("drive frequency differs from the frame frequency")
        half = 0.5 * term.operator
        for n in np.unique(dg):
            mask = dg == n
            add(int(n) + 1, np.where(mask, np.exp(1j * term.phase) * half, 0))
            add(int(n) - 1, np.where(mask, np.exp(-1j * term.phase) * half, 0))
    return comps


def rotating_frame(h, omega_d):
    """Time average in the frame rotating at the drive frequency.

    Returns (rotating FrameHamiltonian, identity offset, audit).  The audit
    lists every dropped harmonic with its largest matrix element.
    """
    if h.frame_tag != "lab":
        raise ValueError("rotating_frame expects a lab-frame Hamiltonian")
    rabi = max((np.max(np.abs(t.operator)) for t in h.drive), default=0.0)
    if rabi / omega_d > RWA_RATIO_LIMIT:
        raise ValidityViolation(f"Omega_M/omega_d = {rabi / omega_d:.3g} is not small",
                                {"Omega_M_over_omega_d": rabi / omega_d})
    comps = _fourier_components(h, omega_d)
    zero = comps.get(0, np.zeros((8, 8), dtype=complex)) - omega_d * np.diag(frame_generator_diag())
    offset = float(np.real(np.trace(zero)) / 8)
    audit = []
    for n in sorted(comps):
        if n == 0:
            continue
        mag = float(np.max(np.abs(comps[n])))
        if mag > 0:
            audit.append(DroppedTerm(n, n * omega_d, mag))
    return FrameHamiltonian(zero - offset * I8, "rotating"), offset, audit


def rotating_frame_formula(dev):
    """Closed-form rotating-frame Hamiltonian for the resonantly driven device."""
    p, c = dev.params, dev.coupling
    qxa, qxb = dev.qx_signed
    sza, szb = qubit_ops(SZ)
    h = 0.5 * p.delta_a * sza + 0.5 * p.delta_b * szb + 0.5 * p.Omega_M * on_m(SX)
    h = h - 0.5 * c.DeltaK * (dev.rx_a.qz * sza + dev.rx_b.qz * szb) @ on_m(SZ)
    flip = kron(SP, I2, SM) + kron(SM, I2, SP)
    flip_b = kron(I2, SP, SM) + kron(I2, SM, SP)
    h = h + c.K_m * (qxa * flip + qxb * flip_b)
    return FrameHamiltonian(h, "rotating")


def lab_propagator(h, t_end, rtol=1e-11):
    if not h.time_dependent:
        return propagator(h.matrix, t_end)
    n = h.dim

    def rhs(t, y):
        return (-1j * h.at(t) @ y.reshape(n, n)).ravel()

    sol = integrate.solve_ivp(rhs, (0.0, t_end), np.eye(n, dtype=complex).ravel(), method="DOP853",
                              rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise QuadratureNonConvergence(sol.message)
    return sol.y[:, -1].reshape(n, n)


def stroboscopic_check(h_lab, h_rf, offset, omega_d, periods=1):
    """Phase-optimized distance between the lab propagator and the rotating-frame reconstruction.

    After whole drive periods the frame unitary is -1 on every state, so it
    only contributes a global phase.
    """
    t_end = periods * TWO_PI / omega_d
    u_lab = lab_propagator(h_lab, t_end)
    u_frame = np.diag(np.exp(-1j * omega_d * t_end * frame_generator_diag()))
    u_rec = u_frame @ propagator(h_rf.matrix + offset * I8, t_end)
    return phase_distance(u_lab, u_rec)


def singlet_dressing():
    """exp(-i pi tau_y / 4) on the mediator; columns are m+ and m-."""
    return on_m(propagator(SY, np.pi / 4))


def dressed_singlet_frame(h):
    if h.frame_tag != "rotating":
        raise ValueError("dressed_singlet_frame expects a rotating-frame Hamiltonian")
    return h.conjugated(singlet_dressing(), "dressed_singlet")


@dataclass(frozen=True)
class RwaReport:
    ratios: dict
    dropped: list
    retained_frequencies: tuple
    passed: bool


def _qubit_diagonal_mask():
    """True where the qubit indices of row and column agree."""
    q = np.arange(8) // 2
    return q[:, None] == q[None, :]


def rwa_ratios(p):
    out = {}
    for name, d in (("a", p.delta_a), ("b", p.delta_b)):
        out[f"Omega_M/|delta_{name}|"] = p.Omega_M / abs(d)
        out[f"Omega_M/|delta_{name}+Omega_M|"] = p.Omega_M / abs(d + p.Omega_M)
        out[f"Omega_M/|delta_{name}-Omega_M|"] = p.Omega_M / abs(d - p.Omega_M)
    return out


def rwa_reduce(h, p, limit=RWA_RATIO_LIMIT):
    """Drop everything that flips a qubit in the dressed-singlet frame.

    In the interaction picture of sum(delta/2 sz) + (Omega_M/2) tau_z those
    terms oscillate at delta or delta +/- Omega_M; what survives oscillates
    at 0 or +/- Omega_M.
    """
    if h.frame_tag != "dressed_singlet":
        raise ValueError("rwa_reduce expects a dressed-singlet Hamiltonian")
    ratios = rwa_ratios(p)
    bad = {k: v for k, v in ratios.items() if v > limit}
    if bad:
        raise ValidityViolation("rotating-wave approximation invalid", ratios)
    e0 = np.real(np.diag(0.5 * p.delta_a * on_a(SZ) + 0.5 * p.delta_b * on_b(SZ) + 0.5 * p.Omega_M * on_m(SZ)))
    mask = _qubit_diagonal_mask()
    dropped, kept = {}, set()
    for i in range(8):
        for j in range(8):
            v = abs(h.matrix[i, j])
            if i == j or v == 0:
                continue
            f = round(float(e0[i] - e0[j]), 9)
            if mask[i, j]:
                kept.add(f)
            else:
                dropped[f] = max(dropped.get(f, 0.0), float(v))
    audit = [DroppedTerm(0, f, m) for f, m in sorted(dropped.items())]
    out = FrameHamiltonian(np.where(mask, h.matrix, 0), "rwa")
    return out, RwaReport(ratios, audit, tuple(sorted(kept)), True)


def rwa_formula(p, qz_a, qz_b, DeltaK):
    sza, szb = qubit_ops(SZ)
    h = 0.5 * p.delta_a * sza + 0.5 * p.delta_b * szb + 0.5 * p.Omega_M * on_m(SZ)
    h = h + 0.5 * DeltaK * (qz_a * sza + qz_b * szb) @ on_m(SX)
    return FrameHamiltonian(h, "rwa")


def conditional_rotation(theta_s, theta_d):
    """exp(-i [(ts+td) sz_a + (ts-td) sz_b] tau_y / 4), diagonal in both qubits."""
    sza, szb = qubit_ops(SZ)
    gen = 0.25 * ((theta_s + theta_d) * sza + (theta_s - theta_d) * szb) @ on_m(SY)
    return propagator(gen, 1.0)


def conditional_diagonalize(h, p):
    if h.frame_tag != "rwa":
        raise ValueError("conditional_diagonalize expects the RWA Hamiltonian")
    if not p.Omega_M > 0:
        raise ValueError("the cascade needs a driven mediator (Omega_M > 0)")
    u = conditional_rotation(p.theta_s, p.theta_d)
    return h.conjugated(u, "diagonalized"), u


def diagonalized_formula(p):
    sza, szb = qubit_ops(SZ)
    tzm = on_m(SZ)
    h = 0.5 * p.delta_a * sza + 0.5 * p.delta_b * szb + 0.5 * p.Omega_M_prime * tzm
    return h + p.K_ab * sza @ szb @ tzm


def offdiagonal_residual(h):
    m = np.asarray(h)
    return float(np.max(np.abs(m - np.diag(np.diag(m)))))


def mediator_branch(h8, branch):
    """4x4 block of an operator with tau_z^M = branch (+1 -> index 0, -1 -> index 1)."""
    k = 0 if branch == 1 else 1
    idx = [i for i in range(8) if i % 2 == k]
    return np.asarray(h8)[np.ix_(idx, idx)]


def traceless(h):
    n = h.shape[0]
    return h - np.trace(h) / n * np.eye(n)


def low_energy_two_qubit(h, branch=-1):
    """Two-qubit block on the chosen mediator branch, identity part removed."""
    if h.frame_tag != "diagonalized":
        raise ValueError("low_energy_two_qubit expects the diagonalized Hamiltonian")
    return traceless(mediator_branch(h.matrix, branch))


def cphase_phase(K_ab, t):
    return 4 * K_ab * t


def qubit_dressing():
    """exp(-i pi sum sigma_y / 4); columns per qubit are |e>, |g>."""
    u1 = propagator(SY, np.pi / 4)
    return kron(u1, u1, I2)


def dressed_qubit_model(h):
    if h.frame_tag != "diagonalized":
        raise ValueError("dressed_qubit_model expects the diagonalized Hamiltonian")
    hq = h.conjugated(qubit_dressing(), "dressed_qubit")
    return hq, traceless(mediator_branch(hq.matrix, -1))


def cross_branch_residual(h8):
    m = np.asarray(h8)
    even = np.arange(8) % 2 == 0
    return float(max(np.max(np.abs(m[np.ix_(even, ~even)])), np.max(np.abs(m[np.ix_(~even, even)]))))


def h_minus(K_ab, delta_a, delta_b):
    sxa, sxb = kron(SX, I2), kron(I2, SX)
    return -0.5 * delta_a * sxa - 0.5 * delta_b * sxb - K_ab * sxa @ sxb


def gate_target():
    """(1 + i sx sx)/sqrt(2) in the dressed basis (|e>, |g>) per qubit."""
    return (np.eye(4) + 1j * kron(SX, SX)) / np.sqrt(2.0)


def gate_conditions(K_ab, delta_a, delta_b, t, rtol=CONDITION_RTOL):
    """Names of the failed quantization conditions (empty when the target is reachable)."""
    failures = []
    if K_ab == 0:
        return ["K_ab must be non-zero"]
    phase = K_ab * t / (np.pi / 4)
    if abs(phase - np.rint(phase)) > rtol * max(1.0, abs(phase)) or int(np.rint(phase)) % 8 != 1:
        failures.append(f"K_ab t = {phase:.6g} pi/4 is not (8m+1) pi/4")
    for name, d in (("delta_a", delta_a), ("delta_b", delta_b)):
        rr = d / (8 * K_ab)
        if abs(rr - np.rint(rr)) > rtol * max(1.0, abs(rr)):
            failures.append(f"{name} = {rr:.6g} * 8 K_ab is not an integer multiple")
    if delta_a != delta_b and abs(delta_a - delta_b) > rtol * max(abs(delta_a), abs(K_ab)):
        failures.append("delta_a differs from delta_b")
    return failures


def gate_unitary(K_ab, delta_a, delta_b, t, require_target=False):
    if require_target:
        failures = gate_conditions(K_ab, delta_a, delta_b, t)
        if failures:
            raise ConditionViolation("gate conditions not met", failures)
    return propagator(h_minus(K_ab, delta_a, delta_b), t)


def gate_distance(dev):
    p = dev.params
    u = gate_unitary(p.K_ab, p.delta_a, p.delta_b, dev.t_gate, require_target=True)
    return phase_distance(u, gate_target())


def propagator_infidelity(h1, h2, t):
    """1 - |Tr(U1^dagger U2)/d|^2 for the two static propagators."""
    u1, u2 = propagator(h1, t), propagator(h2, t)
    d = u1.shape[0]
    return float(1.0 - abs(np.trace(u1.conj().T @ u2) / d) ** 2)


def concurrence(rho4):
    """Wootters concurrence of a two-qubit density matrix."""
    yy = kron(SY, SY)
    r = rho4 @ yy @ rho4.conj() @ yy
    ev = np.sqrt(np.clip(np.sort(np.real(np.linalg.eigvals(r)))[::-1], 0.0, None))
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def product_probe_states():
    """Product qubit states used to probe entangling power, mediator in S11."""
    plus = np.array([1, 1]) / np.sqrt(2)
    plus_i = np.array([1, 1j]) / np.sqrt(2)
    one, zero = np.array([1, 0]), np.array([0, 1])
    s11 = np.array([0, 1])
    singles = (one, zero, plus, plus_i)
    return [np.kron(np.kron(x, y), s11).astype(complex) for x in singles for y in singles]


def max_concurrence(h, t_end, n_times=400, states=None):
    """Largest reduced-state concurrence reached from product probes under a static h."""
    spec = hermitian_eig(h)
    v, e = spec.eigenvectors, spec.eigenvalues
    best = 0.0
    for psi in states or product_probe_states():
        c0 = v.conj().T @ psi
        for t in np.linspace(0.0, t_end, n_times):
            phi = v @ (np.exp(-1j * e * t) * c0)
            rho = np.outer(phi, phi.conj()).reshape(4, 2, 4, 2)
            best = max(best, concurrence(np.einsum("imjm->ij", rho)))
    return best


@dataclass
class CascadeResult:
    device: DeviceModel
    lab: FrameHamiltonian
    rotating: FrameHamiltonian
    rotating_offset: float
    rotating_audit: list
    dressed_singlet: FrameHamiltonian
    rwa: FrameHamiltonian
    rwa_report: RwaReport
    diagonalized: FrameHamiltonian
    u_d: np.ndarray
    dressed_qubit: FrameHamiltonian
    h_minus: np.ndarray
    checks: dict = field(default_factory=dict)


def run_cascade(dev, with_strobe=False):
    p = dev.params
    lab = device_lab(dev)
    rot, offset, audit = rotating_frame(lab, p.omega_d)
    ds = dressed_singlet_frame(rot)
    rwa_h, report = rwa_reduce(ds, p)
    diag, u_d = conditional_diagonalize(rwa_h, p)
    hq, hm = dressed_qubit_model(diag)
    checks = {
        "rotating_vs_formula": float(np.max(np.abs(rot.matrix - rotating_frame_formula(dev).matrix))),
        "unitarity_U_s": unitarity_error(singlet_dressing()),
        "unitarity_U_d": unitarity_error(u_d),
        "unitarity_U_q": unitarity_error(qubit_dressing()),
        "rwa_vs_formula": float(np.max(np.abs(rwa_h.matrix - rwa_formula(p, dev.rx_a.qz, dev.rx_b.qz,
                                                                           dev.coupling.DeltaK).matrix))),
        "diagonal_vs_formula": float(np.max(np.abs(diag.matrix - diagonalized_formula(p)))),
        "offdiagonal_residual": offdiagonal_residual(diag.matrix),
        "cross_branch_residual": cross_branch_residual(hq.matrix),
        "h_minus_vs_formula": float(np.max(np.abs(hm - h_minus(p.K_ab, p.delta_a, p.delta_b)))),
        "rwa_infidelity_t_gate": propagator_infidelity(ds.matrix, rwa_h.matrix, dev.t_gate),
        "gate_distance": gate_distance(dev),
        "t_gate_ns": dev.t_gate,
    }
    if with_strobe:
        checks["stroboscopic_distance"] = stroboscopic_check(lab, rot, offset, p.omega_d)
    return CascadeResult(dev, lab, rot, offset, audit, ds, rwa_h, report, diag, u_d, hq, hm, checks)
