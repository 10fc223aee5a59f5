"""Dephasing master equations, gate fidelity and leakage.

All channels have the form (gamma/2)(L rho L^dagger - rho) with
L^dagger L = 1, which equals the usual Lindblad dissipator for such L.
Time dependence enters only through phased operators (see PhasedOperator),
so every run goes through the same fixed-step RK4 kernel.
"""

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import effective_model as em
from . import integrator
from . import rx_qubit as rx
from .errors import DivisionByZeroRate, InvariantBreach, StepNonConvergence
from .operator_algebra import I2, SX, SY, SZ, check_hermitian, hermitian_eig, kron, propagator
from .units import TWO_PI, mhz

TRACE_LIMIT = 1e-6
FIDELITY_TOL = 1e-8
LEAKAGE_TOL = 1e-6
HERMITIAN_LIMIT = 1e-10
POSITIVITY_LIMIT = 1e-8
T2_STAR_NS = 3500.0
REFERENCE_GAMMA = mhz(0.25)
REFERENCE_GAMMA_M = mhz(0.37)
LEAKAGE_BOUND = 0.13
FIDELITY_TARGET = 0.99


@dataclass(frozen=True)
class PhasedOperator:
    """Sum over terms of diag(exp(i a t)) M diag(exp(-i b t))."""

    terms: tuple

    @classmethod
    def static(cls, m):
        m = np.asarray(m, dtype=complex)
        z = np.zeros(m.shape[0])
        return cls(((m, z, z),))

    @classmethod
    def harmonic(cls, m, omega, phase=0.0):
        """cos(omega t + phase) m."""
        m = np.asarray(m, dtype=complex)
        n = m.shape[0]
        z = np.zeros(n)
        up = (0.5 * np.exp(1j * phase) * m, np.full(n, omega), z)
        down = (0.5 * np.exp(-1j * phase) * m, np.full(n, -omega), z)
        return cls((up, down))

    @classmethod
    def rotating(cls, m, energies):
        """exp(i E t) m exp(-i E t) for diagonal E."""
        e = np.asarray(energies, dtype=float)
        return cls(((np.asarray(m, dtype=complex), e, e),))

    @classmethod
    def from_frame(cls, h):
        op = cls.static(h.matrix)
        for d in h.drive:
            op = op + cls.harmonic(d.operator, d.omega, d.phase)
        return op

    def __add__(self, other):
        return PhasedOperator(self.terms + other.terms)

    @property
    def dim(self):
        return self.terms[0][0].shape[0]

    @property
    def is_static(self):
        return all(not np.any(a) and not np.any(b) for _, a, b in self.terms)

    def at(self, t):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for m, a, b in self.terms:
            out += np.exp(1j * a * t)[:, None] * m * np.exp(-1j * b * t)[None, :]
        return out


def as_phased(op):
    if isinstance(op, PhasedOperator):
        return op
    if isinstance(op, em.FrameHamiltonian):
        return PhasedOperator.from_frame(op)
    return PhasedOperator.static(op)


@dataclass(frozen=True)
class NoiseParams:
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    gamma_M: float = 0.0

    def __post_init__(self):
        if min(self.gamma_a, self.gamma_b, self.gamma_M) < 0:
            raise ValueError("dephasing rates must be non-negative")

    @classmethod
    def symmetric(cls, gamma, gamma_M):
        return cls(gamma, gamma, gamma_M)

    def dressed_basis_valid(self, Omega_M):
        ok = self.gamma_M <= 0.1 * Omega_M
        if not ok:
            warnings.warn("gamma_M > 0.1 Omega_M: the dressed mediator basis is not a good description",
                          stacklevel=2)
        return ok


def check_density(rho, trace_tol=1e-8):
    """Raise InvariantBreach unless rho is Hermitian, unit trace and positive."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITIAN_LIMIT:
        raise InvariantBreach(f"density matrix anti-Hermitian part {herm:.2e}")
    tr = abs(np.trace(rho) - 1.0)
    if tr > trace_tol:
        raise InvariantBreach(f"trace deviates from 1 by {tr:.2e}")
    low = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if low < -POSITIVITY_LIMIT:
        raise InvariantBreach(f"negative eigenvalue {low:.2e}")
    return rho


def pure_state(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


@dataclass
class SimulationResult:
    times: np.ndarray
    values: np.ndarray
    final_state: np.ndarray
    steps: int
    dt: float
    max_trace_drift: float
    hermiticity_drift: float
    refinement_change: float
    backend: str
    snapshots: np.ndarray = field(default=None, repr=False)


def _pack(hamiltonian, dissipators):
    ops = [as_phased(hamiltonian)] + [as_phased(op) for _, op in dissipators]
    ms, a, b, owner = [], [], [], []
    for k, op in enumerate(ops):
        for m, aa, bb in op.terms:
            ms.append(m)
            a.append(aa)
            b.append(bb)
            owner.append(k)
    rates = np.array([float(g) for g, _ in dissipators], dtype=float)
    return (np.array(ms, dtype=complex), np.array(a, dtype=float), np.array(b, dtype=float),
            np.array(owner, dtype=np.int64), rates, ops)


def _check_channels(ops, rates):
    for g, op in zip(rates, ops[1:]):
        if g < 0:
            raise ValueError("negative dephasing rate")
        l0 = op.at(0.0)
        err = np.max(np.abs(l0.conj().T @ l0 - np.eye(l0.shape[0])))
        if err > 1e-10:
            raise ValueError(f"dephasing form needs L^dagger L = 1 (error {err:.1e})")


def evolve(hamiltonian, dissipators, rho0, t_end, dt=None, n_steps=None, samples=1,
           observable=None, tol=FIDELITY_TOL, max_refinements=6, refine=True, backend=None):
    """RK4 integration with step halving until the observable stops moving.

    ``samples`` evenly spaced sample intervals are recorded (plus t = 0).
    ``observable(times, states)`` maps the stack of sampled states to a
    real array; it defaults to the states themselves.  The returned result
    comes from the finest run, with ``refinement_change`` the last change.
    """
    ms, a, b, owner, rates, ops = _pack(hamiltonian, dissipators)
    _check_channels(ops, rates)
    rho0 = check_density(rho0)
    if n_steps is None:
        if dt is None:
            raise ValueError("give dt or n_steps")
        n_steps = max(1, int(np.ceil(t_end / dt)))
    n_steps = int(np.ceil(n_steps / samples) * samples)
    kernel = backend or integrator.rk4_evolve
    obs = observable or (lambda times, states: np.asarray(states))

    def run(n):
        h = t_end / n
        rho, snaps, drift = kernel(rho0, ms, a, b, owner, rates, 0.0, h, n, n // samples)
        times = np.linspace(0.0, t_end, samples + 1)
        return rho, snaps, drift, times, np.real_if_close(obs(times, snaps))

    rho, snaps, drift, times, vals = run(n_steps)
    change = np.nan
    attempts = 0
    while refine:
        n_steps *= 2
        rho2, snaps2, drift2, times, vals2 = run(n_steps)
        change = float(np.max(np.abs(np.asarray(vals2) - np.asarray(vals))))
        rho, snaps, drift, vals = rho2, snaps2, max(drift, drift2), vals2
        attempts += 1
        if change < tol:
            break
        if attempts >= max_refinements:
            raise StepNonConvergence(f"observable still changes by {change:.2e} after {attempts} halvings")
    if drift > TRACE_LIMIT:
        raise InvariantBreach(f"trace drifted by {drift:.2e}")
    herm = float(np.max(np.abs(snaps - np.conj(np.swapaxes(snaps, -1, -2)))))
    if herm > 1e-8:
        raise InvariantBreach(f"Hermiticity drift {herm:.2e}")
    check_density(rho, trace_tol=TRACE_LIMIT)
    name = "compiled" if kernel is integrator.compiled_rk4 else "python"
    return SimulationResult(times, np.asarray(vals), rho, n_steps, t_end / n_steps, float(drift), herm,
                            change, name, snaps)


# dissipators per frame

def qubit_dephasing_ops(frame_tag):
    """Qubit channels: sigma_z in the computational frames, sigma-tilde_x once dressed."""
    if frame_tag in ("dressed_qubit", "interaction"):
        return em.on_a(SX), em.on_b(SX)
    return em.on_a(SZ), em.on_b(SZ)


def tx_formula(theta_s, theta_d):
    """Mediator dephasing operator in the diagonalized frame."""
    cs, cd, ss, sd = np.cos(theta_s), np.cos(theta_d), np.sin(theta_s), np.sin(theta_d)
    sza, szb = em.qubit_ops(SZ)
    first = 0.5 * ((cs + cd) * np.eye(8) + (cs - cd) * sza @ szb) @ em.on_m(SX)
    second = 0.5 * ((ss + sd) * sza + (ss - sd) * szb) @ em.on_m(SZ)
    return first + second


def tx_tilde_formula(theta_s, theta_d):
    """Mediator dephasing operator in the dressed-qubit frame."""
    cs, cd, ss, sd = np.cos(theta_s), np.cos(theta_d), np.sin(theta_s), np.sin(theta_d)
    sxa, sxb = em.qubit_ops(SX)
    first = 0.5 * ((cs + cd) * np.eye(8) + (cs - cd) * sxa @ sxb) @ em.on_m(SX)
    second = 0.5 * ((ss + sd) * sxa + (ss - sd) * sxb) @ em.on_m(SZ)
    return first - second


def tx_conjugation(theta_s, theta_d):
    """Oracle for tx_formula: tau-tilde_x carried through the conditional rotation."""
    u = em.conditional_rotation(theta_s, theta_d)
    return u.conj().T @ em.on_m(SX) @ u


def interaction_h0(p):
    """-sum(delta/2) sigma-tilde_x + (Omega_M'/2) tau_z: the part removed by the interaction picture."""
    sxa, sxb = em.qubit_ops(SX)
    return -0.5 * p.delta_a * sxa - 0.5 * p.delta_b * sxb + 0.5 * p.Omega_M_prime * em.on_m(SZ)


def interaction_coupling(p):
    sxa, sxb = em.qubit_ops(SX)
    return p.K_ab * sxa @ sxb @ em.on_m(SZ)


def dissipator_operators(frame_tag, p=None):
    """[(name, operator)] for the two qubits and the mediator in the given frame.

    The interaction-frame mediator operator is a PhasedOperator; every other
    entry is a fixed matrix.
    """
    qa, qb = qubit_dephasing_ops(frame_tag)
    if frame_tag in ("lab", "rotating"):
        med = em.on_m(SZ)
    elif frame_tag in ("dressed_singlet", "rwa"):
        med = em.on_m(SX)
    elif frame_tag == "diagonalized":
        med = tx_formula(p.theta_s, p.theta_d)
    elif frame_tag == "dressed_qubit":
        med = tx_tilde_formula(p.theta_s, p.theta_d)
    elif frame_tag == "interaction":
        med = interaction_tx(p)
    else:
        raise ValueError(f"unknown frame {frame_tag!r}")
    return [("qubit_a", qa), ("qubit_b", qb), ("mediator", med)]


def interaction_tx(p, basis=None):
    """T'_x(t) = U_int^dagger T-tilde_x U_int with U_int = exp(-i H0 t).

    ``basis`` is an eigenbasis of H0; the operator is returned in that basis.
    Without it the computational basis is kept and the operator is expanded
    over eigenvalue pairs.
    """
    spec = hermitian_eig(interaction_h0(p))
    w, lam = spec.eigenvectors, spec.eigenvalues
    t_w = w.conj().T @ tx_tilde_formula(p.theta_s, p.theta_d) @ w
    if basis is not None:
        return PhasedOperator.rotating(t_w, lam)
    # W diag(e^{i lam t}) T_w diag(e^{-i lam t}) W^dagger as one phased term per eigenvalue pair
    terms = []
    for i in range(8):
        for j in range(8):
            if abs(t_w[i, j]) < 1e-15:
                continue
            m = t_w[i, j] * np.outer(w[:, i], w[:, j].conj())
            terms.append((m, np.full(8, lam[i]), np.full(8, lam[j])))
    return PhasedOperator(tuple(terms))


def eg_minus_state():
    """|e g, M-> in the dressed-qubit frame (tau_z^M = -1 branch)."""
    psi = np.zeros(8, dtype=complex)
    psi[0 * 4 + 1 * 2 + 1] = 1.0
    return psi


def ideal_final_state(psi_i=None):
    psi = eg_minus_state() if psi_i is None else np.asarray(psi_i, dtype=complex)
    return kron(em.gate_target(), I2) @ psi


@dataclass(frozen=True)
class InteractionModel:
    """Interaction-picture master equation written in an eigenbasis of H0."""

    basis: np.ndarray
    coupling: np.ndarray
    qubit_ops: tuple
    mediator_op: PhasedOperator

    def to_basis(self, v):
        return self.basis.conj().T @ v


def interaction_model(p):
    spec = hermitian_eig(interaction_h0(p))
    w = spec.eigenvectors
    conv = lambda m: w.conj().T @ m @ w
    qa, qb = qubit_dephasing_ops("interaction")
    return InteractionModel(w, conv(interaction_coupling(p)), (conv(qa), conv(qb)), interaction_tx(p, basis=True))


def frame_equivalence(noise, p, rho0, t_end, n_steps=20000, backend=None):
    """Largest elementwise gap between the diagonalized-frame and dressed-qubit master equations.

    Both are integrated from the same physical state; the dressed run is
    mapped back with the qubit dressing before comparing.
    """
    h_diag = em.diagonalized_formula(p)
    u_q = em.qubit_dressing()
    h_q = u_q.conj().T @ h_diag @ u_q
    rates = (noise.gamma_a, noise.gamma_b, noise.gamma_M)
    ops_d = [op for _, op in dissipator_operators("diagonalized", p)]
    ops_q = [op for _, op in dissipator_operators("dressed_qubit", p)]
    rho0 = check_density(rho0)
    kw = dict(n_steps=n_steps, refine=False, backend=backend)
    res_d = evolve(h_diag, list(zip(rates, ops_d)), rho0, t_end, **kw)
    res_q = evolve(h_q, list(zip(rates, ops_q)), u_q.conj().T @ rho0 @ u_q, t_end, **kw)
    back = u_q @ res_q.final_state @ u_q.conj().T
    return float(np.max(np.abs(back - res_d.final_state)))


def gate_fidelity(noise, p, psi_i=None, t_end=None, steps_per_gate=2000, backend=None, tol=FIDELITY_TOL):
    """F = <psi_f| rho'(t_g) |psi_f> for the interaction-picture master equation."""
    t_g = em.gate_time(p.K_ab) if t_end is None else t_end
    model = interaction_model(p)
    psi = eg_minus_state() if psi_i is None else np.asarray(psi_i, dtype=complex)
    rho0 = pure_state(model.to_basis(psi))
    target = model.to_basis(ideal_final_state(psi))
    diss = [(noise.gamma_a, model.qubit_ops[0]), (noise.gamma_b, model.qubit_ops[1]),
            (noise.gamma_M, model.mediator_op)]

    def fid(times, states):
        return np.real(np.einsum("i,kij,j->k", target.conj(), states, target))

    res = evolve(model.coupling, diss, rho0, t_g, n_steps=steps_per_gate, observable=fid, tol=tol,
                 backend=backend)
    return float(res.values[-1]), res


def _fidelity_cell(args):
    g, gm, p, steps = args
    return gate_fidelity(NoiseParams.symmetric(g, gm), p, steps_per_gate=steps)[0]


def resolve_workers(workers=None):
    env = os.environ.get("QDE_WORKERS")
    if env:
        workers = int(env)
    return max(1, int(workers or 1))


@dataclass
class FidelityMap:
    gammas: np.ndarray
    gamma_Ms: np.ndarray
    # F[i, j] at gammas[i], gamma_Ms[j]
    F: np.ndarray

    @property
    def monotone(self):
        eps = 1e-9
        return bool(np.all(np.diff(self.F, axis=0) <= eps) and np.all(np.diff(self.F, axis=1) <= eps))

    def rows(self):
        out = []
        for i, g in enumerate(self.gammas):
            for j, gm in enumerate(self.gamma_Ms):
                out.append((g / mhz(1.0), gm / mhz(1.0), float(self.F[i, j])))
        return out


def fidelity_map(gammas, gamma_Ms, p, workers=None, steps_per_gate=2000):
    gammas = np.asarray(gammas, dtype=float)
    gamma_Ms = np.asarray(gamma_Ms, dtype=float)
    if not (np.all(np.isfinite(gammas)) and np.all(np.isfinite(gamma_Ms))):
        raise ValueError("rate grids must be finite")
    cells = [(g, gm, p, steps_per_gate) for g in gammas for gm in gamma_Ms]
    n = resolve_workers(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            vals = list(pool.map(_fidelity_cell, cells))
    else:
        vals = [_fidelity_cell(c) for c in cells]
    return FidelityMap(gammas, gamma_Ms, np.array(vals).reshape(len(gammas), len(gamma_Ms)))


def fidelity_threshold(p, axis, target=FIDELITY_TARGET, bracket=(mhz(0.01), mhz(5.0)), steps_per_gate=500):
    """Rate at which F crosses ``target`` with the other rate held at zero."""

    def f(x):
        noise = NoiseParams.symmetric(x, 0.0) if axis == "gamma" else NoiseParams.symmetric(0.0, x)
        return gate_fidelity(noise, p, steps_per_gate=steps_per_gate)[0] - target

    return brentq(f, *bracket, xtol=1e-9)


def sensitivity(p, gamma=REFERENCE_GAMMA, gamma_M=REFERENCE_GAMMA_M, step=mhz(0.01)):
    """(dF/dgamma, dF/dgamma_M) at the given point, by forward differences."""
    f0 = gate_fidelity(NoiseParams.symmetric(gamma, gamma_M), p)[0]
    fg = gate_fidelity(NoiseParams.symmetric(gamma + step, gamma_M), p)[0]
    fm = gate_fidelity(NoiseParams.symmetric(gamma, gamma_M + step), p)[0]
    return (fg - f0) / step, (fm - f0) / step


def cooperativity(K_ab, gamma, gamma_M):
    if gamma <= 0 or gamma_M <= 0:
        raise DivisionByZeroRate("cooperativity needs positive dephasing rates")
    return K_ab ** 2 / (gamma_M * gamma)


def t2_star_over_gate(t_gate, t2_star=T2_STAR_NS):
    return t2_star / t_gate


# 32-dimensional leakage run

SIGMA_Z_COUNTERPARTS = {
    "branch": np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex),
    "parity": np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex),
}
# eigen4 positions of the logical |1>, |0>
LOGICAL = rx.LOGICAL_INDICES


def _embed8_to_32(psi8):
    out = np.zeros(32, dtype=complex)
    for i in range(2):
        for j in range(2):
            for m in range(2):
                out[LOGICAL[i] * 8 + LOGICAL[j] * 2 + m] = psi8[i * 4 + j * 2 + m]
    return out


def computational_projector32():
    diag = np.zeros(32)
    for i in LOGICAL:
        for j in LOGICAL:
            diag[i * 8 + j * 2: i * 8 + j * 2 + 2] = 1.0
    return np.diag(diag).astype(complex)


def lab_initial_state(p):
    """Lab image of |eg, M->: undo the dressed-qubit, conditional and singlet rotations at t = 0."""
    u = em.singlet_dressing() @ em.conditional_rotation(p.theta_s, p.theta_d) @ em.qubit_dressing()
    return u @ eg_minus_state()


@dataclass(frozen=True)
class LeakageModel:
    static: np.ndarray
    drive: np.ndarray
    omega_d: float
    phi: float
    qubit_ops: tuple
    mediator_op: np.ndarray
    psi0: np.ndarray
    projector: np.ndarray


def leakage_model(dev, counterpart="branch"):
    """32-dim lab Hamiltonian: four-level qubits, two-level mediator."""
    e4 = lambda m: np.diag(m.energies - 0.5 * m.delta).astype(complex)
    n_a = rx.number_operator(dev.rx_a, 3, "eigen4")
    n_b = rx.number_operator(dev.rx_b, 1, "eigen4")
    i4 = np.eye(4)
    c = em.coupling_factor(dev.coupling)
    hs = kron(e4(dev.rx_a), i4, I2) + kron(i4, e4(dev.rx_b), I2) + kron(i4, i4, 0.5 * dev.mediator.omega_s * SZ)
    hs = hs + kron(n_a, i4, c) + kron(i4, n_b, c)
    hd = kron(i4, i4, dev.drive.rabi * SX)
    z4 = SIGMA_Z_COUNTERPARTS[counterpart]
    ops = (kron(z4, i4, I2), kron(i4, z4, I2))
    return LeakageModel(check_hermitian(hs), hd, dev.drive.omega_d, dev.drive.phi, ops, kron(i4, i4, SZ),
                        _embed8_to_32(lab_initial_state(dev.params)), computational_projector32())


def leakage_simulation(dev, noise=None, t_max=None, steps_per_gate=4000, sample_dt=0.01,
                       counterpart="branch", tol=LEAKAGE_TOL, backend=None, refine=True):
    """Leakage L(t) = Tr[Q rho Q] of the lab-frame 32-dim model.

    Integration runs in the interaction picture of the (traceless) static
    Hamiltonian, so the kernel only sees the drive and the rotated
    dephasing operators.
    """
    noise = noise or NoiseParams.symmetric(REFERENCE_GAMMA, REFERENCE_GAMMA_M)
    t_max = 9 * dev.t_gate if t_max is None else t_max
    lm = leakage_model(dev, counterpart)
    h0 = lm.static - np.trace(lm.static) / 32 * np.eye(32)
    spec = hermitian_eig(h0)
    v, e = spec.eigenvectors, spec.eigenvalues
    conv = lambda m: v.conj().T @ m @ v
    hd = conv(lm.drive)
    drive = PhasedOperator((
        (0.5 * np.exp(1j * lm.phi) * hd, e + lm.omega_d, e),
        (0.5 * np.exp(-1j * lm.phi) * hd, e - lm.omega_d, e),
    ))
    diss = [(noise.gamma_a, PhasedOperator.rotating(conv(lm.qubit_ops[0]), e)),
            (noise.gamma_b, PhasedOperator.rotating(conv(lm.qubit_ops[1]), e)),
            (noise.gamma_M, PhasedOperator.rotating(conv(lm.mediator_op), e))]
    p_e = conv(lm.projector)
    q_e = np.eye(32) - p_e
    rho0 = pure_state(conv_vec(v, lm.psi0))
    samples = max(1, int(round(t_max / sample_dt)))
    n_steps = int(np.ceil(steps_per_gate * t_max / dev.t_gate / samples)) * samples

    def leak(times, states):
        ph = np.exp(-1j * np.outer(times, e))
        lab = ph[:, :, None] * states * ph.conj()[:, None, :]
        return np.real(np.einsum("ij,kji->k", q_e, lab))

    res = evolve(drive, diss, rho0, t_max, n_steps=n_steps, samples=samples, observable=leak, tol=tol,
                 backend=backend, refine=refine, max_refinements=3)
    ph = np.exp(-1j * e * t_max)
    res.final_state = v @ (ph[:, None] * res.final_state * ph.conj()[None, :]) @ v.conj().T
    completeness = float(np.max(np.abs(p_e + q_e - np.eye(32))))
    res.snapshots = None
    return res, completeness


def conv_vec(v, psi):
    return v.conj().T @ psi
