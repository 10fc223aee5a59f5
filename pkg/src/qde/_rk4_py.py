"""numpy implementation of the RK4 kernel; same signature as the compiled one."""

import numpy as np


def _evaluate(t, ms, a, b, owner, nops, dynamic, base):
    out = base.copy()
    for k in np.nonzero(dynamic[owner])[0]:
        out[owner[k]] += np.exp(1j * a[k] * t)[:, None] * ms[k] * np.exp(-1j * b[k] * t)[None, :]
    return out


def _rhs(rho, ops, rates, half_total):
    h = ops[0]
    out = -1j * (h @ rho - rho @ h)
    for j, g in enumerate(rates):
        if g != 0.0:
            lj = ops[j + 1]
            out += 0.5 * g * (lj @ rho @ lj.conj().T)
    return out - half_total * rho


def rk4_evolve(rho0, ms, a, b, owner, rates, t0, dt, nsteps, stride):
    rho = np.array(rho0, dtype=complex, order="C")
    ms = np.asarray(ms, dtype=complex)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    owner = np.asarray(owner, dtype=np.int64)
    rates = np.asarray(rates, dtype=float)
    if not (len(ms) == len(owner) == len(a) == len(b)):
        raise ValueError("term arrays disagree in length")
    if stride < 1 or nsteps < 0:
        raise ValueError("stride must be positive and nsteps non-negative")
    n = rho.shape[0]
    nops = len(rates) + 1
    dynamic = np.zeros(nops, dtype=bool)
    for k in range(len(ms)):
        if np.any(a[k] != 0.0) or np.any(b[k] != 0.0):
            dynamic[owner[k]] = True
    base = np.zeros((nops, n, n), dtype=complex)
    for k in range(len(ms)):
        if not dynamic[owner[k]]:
            base[owner[k]] += ms[k]
    half_total = 0.5 * float(np.sum(rates))
    nsnap = nsteps // stride + 1
    snaps = np.empty((nsnap, n, n), dtype=complex)
    snaps[0] = rho
    tr0 = np.trace(rho).real
    drift = 0.0
    p0 = _evaluate(t0, ms, a, b, owner, nops, dynamic, base)
    snap = 1
    for step in range(nsteps):
        t = t0 + step * dt
        pm = _evaluate(t + 0.5 * dt, ms, a, b, owner, nops, dynamic, base)
        p1 = _evaluate(t + dt, ms, a, b, owner, nops, dynamic, base)
        k1 = _rhs(rho, p0, rates, half_total)
        k2 = _rhs(rho + 0.5 * dt * k1, pm, rates, half_total)
        k3 = _rhs(rho + 0.5 * dt * k2, pm, rates, half_total)
        k4 = _rhs(rho + dt * k3, p1, rates, half_total)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = max(drift, abs(np.trace(rho).real - tr0))
        p0 = p1
        if (step + 1) % stride == 0:
            snaps[snap] = rho
            snap += 1
    return rho, snaps, drift
