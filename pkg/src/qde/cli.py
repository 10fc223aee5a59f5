"""Command-line entry point.

Each subcommand writes its tables into the output directory and records
every file, with its sha256, in ``manifest.json``.  Outputs depend only on
the config and the package version, so re-runs reproduce the checksums.

Exit codes: 0 ok, 2 config error, 3 validity or condition violation,
4 failed validation check, 1 anything else.
"""

import argparse
import datetime
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import charge_stability as cs
from . import config as cfgmod
from . import coulomb_coupling as cc
from . import effective_model as em
from . import lindblad_engine as le
from . import mediator_dot as md
from . import rx_qubit as rx
from .errors import (
    ConditionViolation, ConfigError, GeometryOutOfRange, NonSymmetricPoint, QdeError, ValidityViolation,
)
from .units import TWO_PI, ghz, mhz, to_ghz, to_mhz

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_VALIDITY, EXIT_CHECK = 0, 1, 2, 3, 4
# what to draw from each table; rendering is left to the user's plotting tool
PLOT_HINTS = {
    "spectrum": ["line plot of E1..E4 against Delta_over_tc"],
    "stability": ["image of the ground configuration over (x, y) per stability_*.csv",
                  "scatter of boundaries_*.csv over the image"],
    "dipole": [],
    "coupling": ["K_ab against lambda_nm, one line per a_nm, K_ab_sw dashed"],
    "gate": [],
    "fidelity-map": ["heat map of F over (gamma_over_2pi_MHz, gammaM_over_2pi_MHz) with the F = 0.99 contour"],
    "leakage": ["L against t_ns"],
    "validate": [],
}

SUBCOMMANDS = ("spectrum", "stability", "dipole", "coupling", "gate", "fidelity-map", "leakage", "validate")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(format(float(obj), ".12g"))
    return obj


class Output:
    """Collects written files for the manifest."""

    def __init__(self, directory, cfg, fmt=None):
        self.directory = directory
        self.cfg = cfg
        self.formats = (fmt,) if fmt else cfg["output.formats"]
        self.files = []
        os.makedirs(directory, exist_ok=True)

    def _path(self, name):
        return os.path.join(self.directory, name)

    def _record(self, name, text):
        with open(self._path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.files.append((name, hashlib.sha256(text.encode()).hexdigest()))

    def table(self, stem, columns, rows, meta=None):
        meta = dict(meta or {})
        meta["config_sha256"] = self.cfg.digest
        meta["qde_version"] = __version__
        if "csv" in self.formats:
            lines = [f"# {k}: {v}" for k, v in meta.items()]
            lines.append(",".join(columns))
            lines.extend(",".join(_fmt(v) for v in row) for row in rows)
            self._record(stem + ".csv", "\n".join(lines) + "\n")
        if "json" in self.formats:
            doc = {"meta": meta, "columns": list(columns), "rows": [[_jsonable(v) for v in r] for r in rows]}
            self._record(stem + ".json", json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")

    def document(self, name, doc):
        doc = dict(doc)
        doc["config_sha256"] = self.cfg.digest
        self._record(name, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")

    def manifest(self, command):
        """Merge this run's files into manifest.json; entries from other commands are kept."""
        path = self._path("manifest.json")
        entries = {}
        try:
            with open(path, encoding="utf-8") as fh:
                old = json.load(fh)
            if old.get("config_sha256") == self.cfg.digest:
                entries = {e["file"]: e for e in old.get("outputs", [])}
        except (OSError, ValueError):
            pass
        for name, digest in self.files:
            entries[name] = {"file": name, "sha256": digest, "command": command}
        doc = {
            "command": command,
            "config_sha256": self.cfg.digest,
            "tool_version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
            "outputs": [entries[k] for k in sorted(entries)],
            "plot_hints": PLOT_HINTS.get(command, []),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        return doc


def device_from_config(cfg, coupling_scale=1.0):
    om_s = cfg["mediator.omega_s_ghz"]
    return em.build_device(
        delta=ghz(cfg["qubit.delta_ghz"]), t_c=ghz(cfg["qubit.t_c_ghz"]), lam=cfg["mediator.lambda_nm"],
        a=cfg["geometry.a_nm"], field=cfg["drive.field_v_per_m"], r=cfg["drive.r"], m=cfg["drive.m"],
        j_c=ghz(cfg["mediator.j_c_ghz"]), sigma=cfg["geometry.sigma_nm"], eps_r=cfg["geometry.permittivity"],
        phi=cfg["drive.phase_rad"], coupling_scale=coupling_scale,
        omega_s=None if om_s is None else ghz(om_s),
    )


def noise_from_config(cfg):
    return le.NoiseParams.symmetric(mhz(cfg["noise.gamma_mhz"]), mhz(cfg["noise.gamma_m_mhz"]))


def cmd_spectrum(cfg, out, args):
    t_c = ghz(cfg["qubit.t_c_ghz"])
    ratios = np.linspace(0.0, cfg["grids.spectrum_max_delta_over_tc"], cfg["grids.spectrum_points"])
    table = rx.spectrum_sweep(t_c, ratios * t_c)
    rows = [(r[0],) + tuple(to_ghz(x) for x in r[1:]) for r in table.rows()]
    out.table("spectrum", ("Delta_over_tc", "E1", "E2", "E3", "E4"), rows,
              {"units": "E in 2pi x GHz", "note": "uniform Delta/2 shift dropped",
               "branches": "E1=-g E2=-e E3=+e E4=+g"})
    return EXIT_OK


def cmd_stability(cfg, out, args):
    nx, ny = cfg["grids.stability_nx"], cfg["grids.stability_ny"]
    rx_p = cs.RxStabilityParams(V=cfg["stability.v_over_u"], eps2=cfg["stability.eps2_over_u"])
    c_p = cs.CenterStabilityParams(U_c=cfg["stability.u_c_over_u"], V_c=cfg["stability.v_c_over_u"],
                                   eps_m=cfg["stability.eps_m_over_u"])
    g_rx = cs.GridSpec(cs.RX_GRID.x_min, cs.RX_GRID.x_max, nx, cs.RX_GRID.y_min, cs.RX_GRID.y_max, ny)
    g_c = cs.GridSpec(cs.CENTER_GRID.x_min, cs.CENTER_GRID.x_max, nx, cs.CENTER_GRID.y_min,
                      cs.CENTER_GRID.y_max, ny)
    summary = {}
    for which, grid, params in (("rx", g_rx, rx_p), ("center", g_c, c_p)):
        m = cs.stability_diagram(which, grid, params)
        out.table(f"stability_{which}", ("x", "y", "n1", "n2", "n3", "energy_over_U"), m.rows(),
                  {"x": m.axis_names[0] + "/U", "y": m.axis_names[1] + "/U"})
        out.table(f"boundaries_{which}", ("x", "y", "configA", "configB"),
                  [(x, y, str(a), str(b)) for x, y, a, b in m.boundaries])
        summary[which] = {"regions": [str(r) for r in m.regions()], "mirror_mismatches": cs.mirror_mismatches(m)}
    chk = cs.operation_point_constraint(cfg["stability.v_mc_over_u"], cfg["stability.eps_m_over_u"],
                                        cfg["stability.v_m_over_u"], cfg["stability.eps2_over_u"])
    summary["constraint_residual"] = chk.residual
    summary["rx_operation_point"] = str(cs.rx_ground_config(0.0, cfg["stability.v_m_over_u"], rx_p)[0])
    summary["center_operation_point"] = str(cs.center_ground_config(0.0, cfg["stability.v_mc_over_u"], c_p)[0])
    out.document("stability_summary.json", summary)
    return EXIT_OK


def cmd_dipole(cfg, out, args):
    lam = cfg["mediator.lambda_nm"]
    dev = device_from_config(cfg)
    dx, dy = md.dipole_matrix_elements(lam)
    qx = md.dipole_quadrature(lam, component="x")
    qy = md.dipole_quadrature(lam, component="y")
    validity = md.two_level_validity(dev.mediator, dev.drive)
    out.document("dipole.json", {
        "lambda_nm": lam,
        "x_closed_form_nm": [dx.real, dx.imag], "x_quadrature_nm": [qx.real, qx.imag],
        "y_closed_form_nm": [dy.real, dy.imag], "y_quadrature_nm": [qy.real, qy.imag],
        "rabi_2pi_MHz": to_mhz(dev.drive.rabi),
        "omega_s_2pi_GHz": to_ghz(dev.mediator.omega_s),
        "delta_T_2pi_GHz": to_ghz(dev.mediator.delta_T),
        "two_level_validity": validity.as_dict(),
    })
    return EXIT_OK


def _sweep_lambdas(cfg):
    lo, hi, step = cfg["grids.sweep_lambda_nm"]
    return np.arange(lo, hi + 0.5 * step, step)


def cmd_coupling(cfg, out, args):
    dev = device_from_config(cfg)
    rows = cc.coupling_sweep(_sweep_lambdas(cfg), cfg["grids.sweep_a_nm"], cfg["drive.field_v_per_m"],
                             dev.rx_a.qz, dev.rx_b.qz, cfg["geometry.sigma_nm"], cfg["geometry.permittivity"])
    conv = []
    for r in rows:
        lam, a, k1, k2, dk, om, kab, ksw, ratio, sw, valid = r
        conv.append((lam, a, to_ghz(k1), to_ghz(k2), to_ghz(dk), to_mhz(om), to_mhz(kab), to_mhz(ksw), ratio, sw,
                     valid))
    out.table("coupling_sweep", cc.SWEEP_COLUMNS, conv,
              {"units": "K1 K2 DeltaK in 2pi x GHz; Omega_M K_ab K_ab_sw in 2pi x MHz",
               "field_V_per_m": cfg["drive.field_v_per_m"]})
    return EXIT_OK


def gate_report(dev):
    res = em.run_cascade(dev)
    p = dev.params
    return {
        "K_ab_2pi_MHz": to_mhz(p.K_ab),
        "t_g_ns": dev.t_gate,
        "delta_a_2pi_GHz": to_ghz(p.delta_a),
        "delta_b_2pi_GHz": to_ghz(p.delta_b),
        "omega_s_2pi_GHz": to_ghz(dev.mediator.omega_s),
        "omega_s_prime_2pi_GHz": to_ghz(p.omega_s_pr),
        "Omega_M_2pi_MHz": to_mhz(p.Omega_M),
        "theta_s": p.theta_s, "theta_d": p.theta_d,
        "r": dev.r, "m": dev.m,
        "rwa_ratios": res.rwa_report.ratios,
        "rwa_dropped_2pi_GHz": [[to_ghz(d.frequency), to_ghz(d.magnitude)] for d in res.rwa_report.dropped],
        "rotating_frame_dropped": [[d.harmonic, to_ghz(d.magnitude)] for d in res.rotating_audit],
        "U_xx_distance": res.checks["gate_distance"],
        "checks": res.checks,
    }


def cmd_gate(cfg, out, args):
    out.document("gate.json", gate_report(device_from_config(cfg)))
    return EXIT_OK


def _rate_grid(max_mhz, n):
    return mhz(1.0) * np.linspace(0.0, max_mhz, n)


def _previous_leakage(out, cfg):
    """max_leakage from a leakage run with the same config in this directory, else None."""
    try:
        with open(out._path("leakage_summary.json"), encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError):
        return None
    return doc.get("max_leakage") if doc.get("config_sha256") == cfg.digest else None


def cmd_fidelity_map(cfg, out, args):
    dev = device_from_config(cfg)
    n = cfg["grids.fidelity_points"]
    fmap = le.fidelity_map(_rate_grid(cfg["grids.fidelity_gamma_max_mhz"], n),
                           _rate_grid(cfg["grids.fidelity_gamma_m_max_mhz"], n), dev.params,
                           workers=args.workers, steps_per_gate=cfg["grids.fidelity_steps_per_gate"])
    out.table("fidelity_map", ("gamma_over_2pi_MHz", "gammaM_over_2pi_MHz", "F"), fmap.rows())
    noise = noise_from_config(cfg)
    f_pt = le.gate_fidelity(noise, dev.params)[0]
    coop = le.cooperativity(dev.params.K_ab, noise.gamma_a, noise.gamma_M) if noise.gamma_a and noise.gamma_M else None
    out.document("fidelity_summary.json", {
        "K_ab_2pi_MHz": to_mhz(dev.params.K_ab), "t_g_ns": dev.t_gate, "F_at_paper_point": f_pt,
        "C": coop, "monotone": fmap.monotone,
        "T2star_over_t_g": le.t2_star_over_gate(dev.t_gate),
        "max_leakage": _previous_leakage(out, cfg),
    })
    return EXIT_OK


def cmd_leakage(cfg, out, args):
    dev = device_from_config(cfg)
    res, _ = le.leakage_simulation(dev, noise_from_config(cfg), t_max=cfg["grids.leakage_gates"] * dev.t_gate,
                                   steps_per_gate=cfg["grids.leakage_steps_per_gate"],
                                   sample_dt=cfg["grids.leakage_sample_ns"])
    out.table("leakage", ("t_ns", "L"), list(zip(res.times, res.values)),
              {"units": "t in ns; L = Tr[Q rho] of the 32-dim lab model", "dephasing_counterpart": "branch"})
    out.document("leakage_summary.json", {
        "K_ab_2pi_MHz": to_mhz(dev.params.K_ab), "t_g_ns": dev.t_gate, "max_leakage": float(np.max(res.values)),
        "steps": res.steps, "dt_ns": res.dt, "max_trace_drift": res.max_trace_drift,
        "refinement_change": res.refinement_change, "backend": res.backend,
    })
    return EXIT_OK


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    kind: str = "relative"

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        if self.kind == "relative":
            diff = (self.value - self.target) / self.target if self.target else float("nan")
            return f"{mark} {self.name}: {self.value:.6g} vs {self.target:.6g} (diff {diff:+.2%}, tol {self.tolerance:.0%})"
        if self.kind == "absolute":
            return f"{mark} {self.name}: {self.value:.6g} vs {self.target:.6g} +/- {self.tolerance:g}"
        if self.kind == "below":
            return f"{mark} {self.name}: {self.value:.6g} < {self.target:.6g}"
        return f"{mark} {self.name}: {self.value:.6g} > {self.target:.6g}"


def rel(name, value, target, tol):
    return Check(name, float(value), float(target), tol, abs(value - target) <= tol * abs(target))


def absolute(name, value, target, tol):
    return Check(name, float(value), float(target), tol, abs(value - target) <= tol, "absolute")


def below(name, value, bound):
    return Check(name, float(value), float(bound), 0.0, value < bound, "below")


def above(name, value, bound):
    return Check(name, float(value), float(bound), 0.0, value > bound, "above")


def reference_checks(cfg, include_leakage=True):
    """Every reference-point check, recomputed from the config."""
    dev = device_from_config(cfg)
    p, c = dev.params, dev.coupling
    q = dev.rx_a
    checks = [
        absolute("q_z", q.qz, 0.022, 0.001),
        rel("K1 [2pi GHz]", to_ghz(c.K1), 64.0, 0.02),
        rel("K2 [2pi GHz]", to_ghz(c.K2), 69.0, 0.02),
        rel("DeltaK [2pi GHz]", to_ghz(c.DeltaK), 4.8, 0.02),
        rel("Omega_M [2pi MHz]", to_mhz(p.Omega_M), 97.0, 0.01),
        rel("K_ab [2pi MHz]", to_mhz(p.K_ab), 34.0, 0.03),
        rel("omega [2pi GHz]", to_ghz(q.omega), 4.9, 0.02),
        rel("2 q_z K0 [2pi GHz]", to_ghz(2 * q.qz * c.K0), 5.8, 0.03),
        rel("(q0a+q0b) DeltaK [2pi GHz]", to_ghz((dev.rx_a.q0 + dev.rx_b.q0) * c.DeltaK), 10.0, 0.05),
        rel("omega_s [2pi GHz]", to_ghz(dev.mediator.omega_s), 16.0, 0.05),
        rel("|delta| [2pi GHz]", to_ghz(abs(p.delta_a)), 27.0, 0.05),
        below("Omega_M/|delta|", max(em.rwa_ratios(p).values()), 0.01),
        rel("t_g [ns]", dev.t_gate, 3.7, 0.03),
        rel("T2*/t_g", le.t2_star_over_gate(dev.t_gate), 950.0, 0.05),
    ]
    rx_map = cs.stability_diagram("rx")
    named = {cs.ChargeConfig(t) for t in ((1, 1, 1), (2, 0, 1), (1, 0, 2))}
    checks.append(Check("rx regions (1,1,1)/(2,0,1)/(1,0,2) present", float(len(named & set(rx_map.regions()))),
                        3.0, 0.0, named <= set(rx_map.regions()), "absolute"))
    cen = cs.center_ground_config(0.0, cfg["stability.v_mc_over_u"])[0]
    checks.append(Check("center ground (1,2,1) at V_mc", float(cen == cs.ChargeConfig((1, 2, 1))), 1.0, 0.0,
                        cen == cs.ChargeConfig((1, 2, 1)), "absolute"))
    res = cs.operation_point_constraint(cfg["stability.v_mc_over_u"], cfg["stability.eps_m_over_u"],
                                        cfg["stability.v_m_over_u"], cfg["stability.eps2_over_u"]).residual
    checks.append(absolute("operation-point residual", res, 0.0, 1e-12))
    checks.append(absolute("F(0,0)", le.gate_fidelity(le.NoiseParams(), p)[0], 1.0, 1e-6))
    noise = noise_from_config(cfg)
    checks.append(above("F at (gamma, gamma_M)", le.gate_fidelity(noise, p)[0], 0.99))
    checks.append(rel("gamma threshold [2pi MHz]", le.fidelity_threshold(p, "gamma") / mhz(1.0), 0.43, 0.10))
    checks.append(rel("gamma_M threshold [2pi MHz]", le.fidelity_threshold(p, "gamma_M") / mhz(1.0), 0.87, 0.10))
    checks.append(rel("cooperativity", le.cooperativity(p.K_ab, noise.gamma_a, noise.gamma_M), 1.3e4, 0.05))
    if include_leakage:
        leak, _ = le.leakage_simulation(dev, noise)
        checks.append(below("max leakage over 9 t_g", float(np.max(leak.values)), 0.13))
    return checks


def cmd_validate(cfg, out, args):
    checks = reference_checks(cfg, include_leakage=not args.skip_leakage)
    for ch in checks:
        print(ch.line())
    out.document("validation.json", {"checks": [ch.__dict__ for ch in checks],
                                     "passed": all(ch.passed for ch in checks)})
    failed = [ch for ch in checks if not ch.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK


COMMANDS = {
    "spectrum": cmd_spectrum, "stability": cmd_stability, "dipole": cmd_dipole, "coupling": cmd_coupling,
    "gate": cmd_gate, "fidelity-map": cmd_fidelity_map, "leakage": cmd_leakage, "validate": cmd_validate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qde", description="Mediated capacitive coupling of RX qubits")
    parser.add_argument("--version", action="version", version=f"qde {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (defaults reproduce the reference parameter set)")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--workers", type=int, default=None, help="worker processes; QDE_WORKERS overrides")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="table format")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "validate":
            sp.add_argument("--skip-leakage", action="store_true", help="skip the 32-dim leakage run")
    sub.add_parser("example-config", help="print the default config")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "example-config":
        print(cfgmod.example_text())
        return EXIT_OK
    try:
        cfg = cfgmod.load(args.config)
        out = Output(args.out or cfg["output.directory"], cfg, args.format)
        code = COMMANDS[args.command](cfg, out, args)
        out.manifest(args.command)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidityViolation, ConditionViolation, GeometryOutOfRange, NonSymmetricPoint) as exc:
        print(f"validity violation: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except (QdeError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
