"""Compare the compiled and numpy RK4 kernels on representative workloads.

    python benchmarks/bench_rk4.py [--steps N] [--repeat R]

n = 8 is the gate-fidelity master equation (static Hamiltonian, one
rotating dephasing operator); n = 32 is the leakage run (two drive terms,
three rotating dephasing operators).  Both backends start from the same
state and the final states are compared.
"""

import argparse
import timeit

import numpy as np

from qde import effective_model as em
from qde import integrator
from qde import lindblad_engine as le


def fidelity_workload():
    p = em.build_device().params
    model = le.interaction_model(p)
    diss = [(le.REFERENCE_GAMMA, model.qubit_ops[0]), (le.REFERENCE_GAMMA, model.qubit_ops[1]),
            (le.REFERENCE_GAMMA_M, model.mediator_op)]
    rho0 = le.pure_state(model.to_basis(le.eg_minus_state()))
    return model.coupling, diss, rho0, em.gate_time(p.K_ab)


def leakage_workload():
    dev = em.build_device()
    lm = le.leakage_model(dev)
    h0 = lm.static - np.trace(lm.static) / 32 * np.eye(32)
    spec = le.hermitian_eig(h0)
    v, e = spec.eigenvectors, spec.eigenvalues
    conv = lambda m: v.conj().T @ m @ v
    hd = conv(lm.drive)
    drive = le.PhasedOperator(((0.5 * hd, e + lm.omega_d, e), (0.5 * hd, e - lm.omega_d, e)))
    diss = [(le.REFERENCE_GAMMA, le.PhasedOperator.rotating(conv(op), e)) for op in lm.qubit_ops]
    diss.append((le.REFERENCE_GAMMA_M, le.PhasedOperator.rotating(conv(lm.mediator_op), e)))
    return drive, diss, le.pure_state(conv(lm.psi0)), dev.t_gate


def bench(name, workload, steps, repeat):
    h, diss, rho0, t_end = workload()
    packed = le._pack(h, diss)
    dt = t_end / steps
    ms, a, b, owner, rates, _ = packed
    backends = [("python", integrator.python_rk4)]
    if integrator.compiled_rk4 is not None:
        backends.append(("compiled", integrator.compiled_rk4))
    finals, times = {}, {}
    for label, kernel in backends:
        call = lambda: kernel(rho0, ms, a, b, owner, rates, 0.0, dt, steps, steps)
        finals[label] = call()[0]
        times[label] = min(timeit.repeat(call, number=1, repeat=repeat)) / steps
    print(f"{name} (n={rho0.shape[0]}, {steps} steps)")
    for label in times:
        print(f"  {label:9s} {times[label] * 1e6:9.1f} us/step")
    if "compiled" in times:
        gap = np.max(np.abs(finals["compiled"] - finals["python"]))
        print(f"  speed-up  {times['python'] / times['compiled']:9.2f}x   max |difference| {gap:.1e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"default backend: {integrator.BACKEND}")
    bench("gate fidelity", fidelity_workload, args.steps, args.repeat)
    bench("leakage", leakage_workload, args.steps, args.repeat)


if __name__ == "__main__":
    main()
